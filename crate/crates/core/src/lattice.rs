//! Twisted tori `R^2 / A Z^2`, their dual lattices and exact energy shells.
//!
//! Frequencies are indexed by `n in Z^2`; the dual vector is `m = A^{-T} n`
//! and the Laplace eigenvalue is `lambda_n = |2 pi m|^2 = 4 pi^2 n^T Q n` with
//! `Q = A^{-1} A^{-T}`. For a rational torus `Q` is rational and
//! `lambda_n = gamma * N(n)` for a primitive integer binary form `N`, so a shell
//! is identified by the integer level `N(n)` and never by a float.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{PiMonomial, SurdRational};

/// Integer frequency index `n = (n1, n2)`.
pub type Index = [i64; 2];

/// Positive-definite integer binary form `a x^2 + b x y + c y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadraticForm {
    pub fn eval(&self, n: Index) -> u64 {
        let (x, y) = (n[0] as i128, n[1] as i128);
        let v = self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y;
        debug_assert!(v >= 0, "form is positive definite");
        v as u64
    }

    /// `4ac - b^2`, positive for a definite form.
    pub fn discriminant(&self) -> i128 {
        4 * self.a as i128 * self.c as i128 - (self.b as i128).pow(2)
    }

    /// Exact bounds `|n1| <= B1`, `|n2| <= B2` containing every `n` with
    /// `N(n) <= level`, from completing the square:
    /// `4c N = (2c n2 + b n1)^2 + D n1^2`.
    pub fn bounding_box(&self, level: u64) -> (i64, i64) {
        let d = self.discriminant();
        let l = level as i128;
        let b1 = isqrt_i128(4 * self.c as i128 * l / d);
        let b2 = isqrt_i128(4 * self.a as i128 * l / d);
        (b1 as i64, b2 as i64)
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*n1^2 + {}*n1*n2 + {}*n2^2", self.a, self.b, self.c)
    }
}

fn isqrt_i128(v: i128) -> i128 {
    if v <= 0 {
        return 0;
    }
    let mut r = (v as f64).sqrt() as i128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// A rational twisted torus.
#[derive(Clone, Debug)]
pub struct TwistedTorus {
    name: String,
    matrix: [[SurdRational; 2]; 2],
    inverse: [[SurdRational; 2]; 2],
    det: SurdRational,
    gram: [[BigRational; 2]; 2],
    gamma: BigRational,
    form: QuadraticForm,
    det_f64: f64,
    gamma_f64: f64,
    matrix_f64: [[f64; 2]; 2],
    dual_f64: [[f64; 2]; 2],
}

fn int_rational(q: &BigRational, l: &BigInt) -> BigInt {
    let v = q * BigRational::from_integer(l.clone());
    debug_assert!(v.is_integer());
    v.to_integer()
}

impl TwistedTorus {
    /// Builds the torus of the lattice spanned by the columns of `matrix`.
    pub fn new(name: impl Into<String>, matrix: [[SurdRational; 2]; 2]) -> Result<Self> {
        let [[a11, a12], [a21, a22]] = &matrix;
        let det = a11.checked_mul(a22)?.checked_sub(&a12.checked_mul(a21)?)?;
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        if det.signum() < 0 {
            return Err(Error::InvalidArgument(
                "lattice matrix must have positive determinant (swap the columns)".into(),
            ));
        }
        let inv = |x: &SurdRational| x.checked_div(&det);
        let inverse = [
            [inv(a22)?, inv(&-a12)?],
            [inv(&-a21)?, inv(a11)?],
        ];
        let [[i11, i12], [i21, i22]] = &inverse;
        let q11 = i11.checked_mul(i11)?.checked_add(&i12.checked_mul(i12)?)?;
        let q12 = i11.checked_mul(i21)?.checked_add(&i12.checked_mul(i22)?)?;
        let q22 = i21.checked_mul(i21)?.checked_add(&i22.checked_mul(i22)?)?;
        let rat = |x: &SurdRational| {
            x.to_rational().ok_or_else(|| Error::IrrationalGram {
                entry: x.to_string(),
            })
        };
        let gram = [[rat(&q11)?, rat(&q12)?], [rat(&q12)?, rat(&q22)?]];

        // lambda_n / pi^2 = 4 Q11 n1^2 + 8 Q12 n1 n2 + 4 Q22 n2^2
        let four = BigRational::from_integer(BigInt::from(4));
        let coeffs = [
            &gram[0][0] * &four,
            &gram[0][1] * &four * BigRational::from_integer(BigInt::from(2)),
            &gram[1][1] * &four,
        ];
        let lcm = coeffs
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let ints: Vec<BigInt> = coeffs.iter().map(|q| int_rational(q, &lcm)).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        let gamma = BigRational::new(g.clone(), lcm);
        let to_i64 = |v: &BigInt| {
            (v / &g)
                .to_i64()
                .ok_or_else(|| Error::InvalidArgument("quadratic form coefficients overflow i64".into()))
        };
        let form = QuadraticForm {
            a: to_i64(&ints[0])?,
            b: to_i64(&ints[1])?,
            c: to_i64(&ints[2])?,
        };
        if form.a <= 0 || form.c <= 0 || form.discriminant() <= 0 {
            // cannot happen for a real invertible matrix
            return Err(Error::InvalidArgument("Gram form is not positive definite".into()));
        }
        let f = |x: &SurdRational| x.to_f64();
        let matrix_f64 = [[f(a11), f(a12)], [f(a21), f(a22)]];
        let dual_f64 = [[f(i11), f(i21)], [f(i12), f(i22)]];
        Ok(Self {
            name: name.into(),
            det_f64: det.to_f64(),
            gamma_f64: gamma.to_f64().expect("finite") * std::f64::consts::PI.powi(2),
            matrix,
            inverse,
            det,
            gram,
            gamma,
            form,
            matrix_f64,
            dual_f64,
        })
    }

    /// The square torus `R^2 / Z^2`.
    pub fn identity() -> Self {
        Self::new(
            "identity",
            [
                [SurdRational::one(), SurdRational::zero()],
                [SurdRational::zero(), SurdRational::one()],
            ],
        )
        .expect("identity torus is rational")
    }

    /// `R^2 / 3 Z[omega]`, the torus tiled by 18 copies of the unit
    /// equilateral triangle: `A = 3 [[1, 1/2], [0, sqrt(3)/2]]`.
    pub fn hexagonal() -> Self {
        Self::new(
            "hexagonal",
            [
                [SurdRational::from_int(3), SurdRational::from_ratio(3, 2)],
                [
                    SurdRational::zero(),
                    SurdRational::surd(3, 2, 3).expect("squarefree"),
                ],
            ],
        )
        .expect("hexagonal torus is rational")
    }

    /// The sheared torus `A = [[1, 1/3], [0, 1]]`.
    pub fn skew() -> Self {
        Self::new(
            "skew",
            [
                [SurdRational::one(), SurdRational::from_ratio(1, 3)],
                [SurdRational::zero(), SurdRational::one()],
            ],
        )
        .expect("skew torus is rational")
    }

    /// Built-in tori by name: `identity`, `hexagonal` (alias `hex`), `skew`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "identity" | "square" => Some(Self::identity()),
            "hexagonal" | "hex" => Some(Self::hexagonal()),
            "skew" => Some(Self::skew()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &[[SurdRational; 2]; 2] {
        &self.matrix
    }

    pub fn inverse(&self) -> &[[SurdRational; 2]; 2] {
        &self.inverse
    }

    pub fn det(&self) -> &SurdRational {
        &self.det
    }

    pub fn det_f64(&self) -> f64 {
        self.det_f64
    }

    /// `Q = A^{-1} A^{-T}`, exactly rational.
    pub fn gram(&self) -> &[[BigRational; 2]; 2] {
        &self.gram
    }

    /// Rational coefficient `c` of `gamma = c * pi^2`.
    pub fn gamma_coeff(&self) -> &BigRational {
        &self.gamma
    }

    pub fn gamma(&self) -> PiMonomial {
        PiMonomial::new(SurdRational::rational(self.gamma.clone()), 2)
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma_f64
    }

    /// Revival period `2 pi / gamma`.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.gamma_f64
    }

    pub fn form(&self) -> QuadraticForm {
        self.form
    }

    pub fn level(&self, n: Index) -> u64 {
        self.form.eval(n)
    }

    /// `lambda_n = gamma * N(n)`.
    pub fn eigenvalue(&self, n: Index) -> f64 {
        self.gamma_f64 * self.level(n) as f64
    }

    /// `lambda_n` carried exactly as a rational multiple of pi^2.
    pub fn eigenvalue_exact(&self, n: Index) -> PiMonomial {
        let lvl = BigRational::from_integer(BigInt::from(self.level(n)));
        PiMonomial::new(SurdRational::rational(&self.gamma * lvl), 2)
    }

    /// Exact dual vector `m = A^{-T} n`.
    pub fn dual_vector(&self, n: Index) -> [SurdRational; 2] {
        let [[i11, i12], [i21, i22]] = &self.inverse;
        let (x, y) = (SurdRational::from_int(n[0]), SurdRational::from_int(n[1]));
        [i11 * &x + i21 * &y, i12 * &x + i22 * &y]
    }

    pub fn dual_f64(&self, n: Index) -> [f64; 2] {
        let (x, y) = (n[0] as f64, n[1] as f64);
        let d = &self.dual_f64;
        [d[0][0] * x + d[0][1] * y, d[1][0] * x + d[1][1] * y]
    }

    /// Point `A s` for lattice coordinates `s`.
    pub fn to_cartesian(&self, s: [f64; 2]) -> [f64; 2] {
        let a = &self.matrix_f64;
        [a[0][0] * s[0] + a[0][1] * s[1], a[1][0] * s[0] + a[1][1] * s[1]]
    }

    /// Lattice generators `e1 = A (1,0)`, `e2 = A (0,1)` as exact vectors.
    pub fn generators(&self) -> [[SurdRational; 2]; 2] {
        let [[a11, a12], [a21, a22]] = &self.matrix;
        [[a11.clone(), a21.clone()], [a12.clone(), a22.clone()]]
    }

    /// Phase `2 pi m . x` of the plane wave with index `n` at `x`.
    pub fn phase(&self, n: Index, x: [f64; 2]) -> f64 {
        let m = self.dual_f64(n);
        2.0 * std::f64::consts::PI * (m[0] * x[0] + m[1] * x[1])
    }

    /// The frequency record for index `n`.
    pub fn frequency(&self, n: Index) -> Frequency {
        Frequency {
            n,
            level: self.level(n),
        }
    }

    /// Every index `n` with `N(n) == level`, sorted lexicographically.
    pub fn shell(&self, level: u64) -> FrequencyShell {
        let QuadraticForm { a, b, c } = self.form;
        let (b1, _) = self.form.bounding_box(level);
        let d = self.form.discriminant();
        let l = level as i128;
        let mut points = Vec::new();
        for n1 in -b1..=b1 {
            let x = n1 as i128;
            // c n2^2 + b n1 n2 + (a n1^2 - L) = 0, discriminant 4cL - D n1^2
            let disc = 4 * c as i128 * l - d * x * x;
            if disc < 0 {
                continue;
            }
            let s = isqrt_i128(disc);
            if s * s != disc {
                continue;
            }
            let mut roots = vec![-(b as i128) * x - s, -(b as i128) * x + s];
            roots.dedup();
            for r in roots {
                if r % (2 * c as i128) == 0 {
                    points.push([n1, (r / (2 * c as i128)) as i64]);
                }
            }
        }
        points.sort();
        debug_assert!(points.iter().all(|&p| self.level(p) == level) || a == 0);
        FrequencyShell { level, points }
    }

    /// All shells `0..=max_level`, empty ones included, each complete.
    pub fn enumerate_levels(&self, max_level: u64) -> Vec<FrequencyShell> {
        let (b1, b2) = self.form.bounding_box(max_level);
        let stripes: Vec<Vec<(u64, Index)>> = (-b1..=b1)
            .into_par_iter()
            .map(|n1| {
                (-b2..=b2)
                    .filter_map(|n2| {
                        let lvl = self.level([n1, n2]);
                        (lvl <= max_level).then_some((lvl, [n1, n2]))
                    })
                    .collect()
            })
            .collect();
        let mut shells: Vec<FrequencyShell> = (0..=max_level)
            .map(|level| FrequencyShell {
                level,
                points: Vec::new(),
            })
            .collect();
        // stripes arrive in n1 order and each is sorted in n2: output is lexicographic
        for stripe in stripes {
            for (lvl, n) in stripe {
                shells[lvl as usize].points.push(n);
            }
        }
        shells
    }

    /// Levels `1..=max_level` whose shells are nonempty.
    pub fn nonempty_levels(&self, max_level: u64) -> Vec<u64> {
        self.enumerate_levels(max_level)
            .into_iter()
            .filter(|s| s.level > 0 && !s.points.is_empty())
            .map(|s| s.level)
            .collect()
    }

    /// Indices with the `count` lowest distinct levels (level 0 included),
    /// ordered by level and then lexicographically.
    pub fn lowest_levels(&self, count: usize) -> Vec<Index> {
        let mut out = Vec::new();
        let mut seen = 0;
        let mut level = 0;
        while seen < count {
            let sh = self.shell(level);
            if !sh.points.is_empty() {
                out.extend(sh.points);
                seen += 1;
            }
            level += 1;
        }
        out
    }
}

/// A frequency of a torus: integer index and its shell level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Frequency {
    pub n: Index,
    pub level: u64,
}

/// All frequencies on one energy level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyShell {
    pub level: u64,
    pub points: Vec<Index>,
}

impl FrequencyShell {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, n: Index) -> bool {
        self.points.binary_search(&n).is_ok()
    }

    /// `n -> -n` maps the shell onto itself.
    pub fn is_symmetric(&self) -> bool {
        self.points.iter().all(|&[a, b]| self.contains([-a, -b]))
    }

    /// CSV rows `n1,n2,level`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            s.push_str(&format!("{},{},{}\n", p[0], p[1], self.level));
        }
        s
    }
}

/// Number of `(x, y) in Z^2` with `x^2 + y^2 = n`, from the factorization
/// `n = 2^a prod p_i^b_i prod q_j^c_j` (`p_i = 1`, `q_j = 3 mod 4`):
/// `4 prod (b_i + 1)` when every `c_j` is even, else 0.
pub fn r2_count(n: u64) -> u64 {
    assert!(n >= 1, "r2_count needs a positive argument");
    let mut rest = n;
    let mut count = 4u64;
    while rest % 2 == 0 {
        rest /= 2;
    }
    let mut p = 3u64;
    while p * p <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            if p % 4 == 1 {
                count *= e + 1;
            } else if e % 2 == 1 {
                return 0;
            }
        }
        p += 2;
    }
    if rest > 1 {
        if rest % 4 == 1 {
            count *= 2;
        } else {
            return 0;
        }
    }
    count
}

/// JSON torus description: `{"name": "...", "A": [["3", "3/2"], ["0", "3/2*sqrt(3)"]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusConfig {
    #[serde(default)]
    pub name: String,
    #[serde(rename = "A")]
    pub matrix: [[SurdRational; 2]; 2],
}

impl TorusConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(self) -> Result<TwistedTorus> {
        TwistedTorus::new(self.name, self.matrix)
    }
}

impl From<&TwistedTorus> for TorusConfig {
    fn from(t: &TwistedTorus) -> Self {
        Self {
            name: t.name.clone(),
            matrix: t.matrix.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_shell(t: &TwistedTorus, level: u64, r: i64) -> Vec<Index> {
        let mut v = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                if t.level([a, b]) == level {
                    v.push([a, b]);
                }
            }
        }
        v
    }

    #[test]
    fn identity_torus_constants() {
        let t = TwistedTorus::identity();
        assert_eq!(t.gamma_coeff(), &BigRational::from_integer(4.into()));
        assert_eq!(t.form(), QuadraticForm { a: 1, b: 0, c: 1 });
        assert_eq!(t.det(), &SurdRational::one());
    }

    #[test]
    fn hexagonal_torus_constants() {
        let t = TwistedTorus::hexagonal();
        assert_eq!(t.gamma_coeff(), &BigRational::new(16.into(), 27.into()));
        assert_eq!(t.form(), QuadraticForm { a: 1, b: -1, c: 1 });
        assert_eq!(t.det(), &"9/2*sqrt(3)".parse().unwrap());
    }

    #[test]
    fn irrational_gram_rejected() {
        // A = [[1, sqrt 2], [0, 1]] gives Q12 = -sqrt(2)
        let m = [
            [SurdRational::one(), "sqrt(2)".parse().unwrap()],
            [SurdRational::zero(), SurdRational::one()],
        ];
        let err = TwistedTorus::new("bad", m).unwrap_err();
        assert!(matches!(err, Error::IrrationalGram { .. }), "{err}");
        // diag(1, sqrt 2) is rational: Q = diag(1, 1/2), lambda_{0,1}/lambda_{1,0} = 1/2
        let ok = [
            [SurdRational::one(), SurdRational::zero()],
            [SurdRational::zero(), "sqrt(2)".parse().unwrap()],
        ];
        let t = TwistedTorus::new("rect", ok).unwrap();
        assert_eq!(t.form(), QuadraticForm { a: 2, b: 0, c: 1 });
        // a quartic root such as 2^(1/4) is not even representable
        assert!(TorusConfig::from_json(r#"{"A": [["1","0"],["0","sqrt(sqrt(2))"]]}"#).is_err());
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = [
            [SurdRational::one(), SurdRational::from_int(2)],
            [SurdRational::from_int(2), SurdRational::from_int(4)],
        ];
        assert_eq!(TwistedTorus::new("s", m).unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn small_shells_match_brute_force() {
        let id = TwistedTorus::identity();
        let shells = id.enumerate_levels(1);
        assert_eq!(shells[0].points, vec![[0, 0]]);
        assert_eq!(shells[1].len(), 4);
        assert!(id.enumerate_levels(3)[3].is_empty());

        let hex = TwistedTorus::hexagonal();
        let mut want = vec![[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]];
        want.sort();
        assert_eq!(hex.shell(1).points, want);
        assert_eq!(hex.enumerate_levels(1)[1].points, want);
    }

    #[test]
    fn shells_complete_against_box_search() {
        for t in [TwistedTorus::identity(), TwistedTorus::hexagonal(), TwistedTorus::skew()] {
            let levels = t.enumerate_levels(60);
            for s in &levels {
                let brute = brute_shell(&t, s.level, 40);
                assert_eq!(s.points, brute, "{} level {}", t.name(), s.level);
                assert_eq!(t.shell(s.level).points, brute);
                if s.level > 0 {
                    assert!(s.is_symmetric());
                }
            }
        }
    }

    #[test]
    fn r2_examples() {
        assert_eq!(r2_count(5), 8);
        assert_eq!(r2_count(9), 4);
        assert_eq!(r2_count(3), 0);
        assert_eq!(r2_count(1), 4);
        assert_eq!(r2_count(2), 4);
        for k in 0..8u32 {
            assert_eq!(r2_count(5u64.pow(k)), 4 * (k as u64 + 1));
        }
    }

    #[test]
    fn r2_matches_enumeration() {
        let id = TwistedTorus::identity();
        for s in id.enumerate_levels(200).into_iter().skip(1) {
            assert_eq!(r2_count(s.level), s.len() as u64, "N = {}", s.level);
        }
    }

    #[test]
    fn torus_config_round_trip() {
        let json = r#"{"name": "hex", "A": [["3", "3/2"], ["0", "3/2*sqrt(3)"]]}"#;
        let t = TorusConfig::from_json(json).unwrap().build().unwrap();
        assert_eq!(t.form(), TwistedTorus::hexagonal().form());
        let back = serde_json::to_string(&TorusConfig::from(&t)).unwrap();
        assert_eq!(back, r#"{"name":"hex","A":[["3","3/2"],["0","3/2*sqrt(3)"]]}"#);
    }
}
