//! Dirichlet and Neumann eigenmodes of the unit equilateral triangle.
//!
//! A mode `(m, n)` with `3 | m + n` is a finite sum of plane waves
//! `exp(i k_{m',n'} . x)` over the six-term orbit of `(m, n)` under the index
//! maps `S1: (m, n) -> (m, m - n)` and `S2: (m, n) -> (n - m, n)`, with all
//! plus signs (Neumann) or signs alternating along the orbit (Dirichlet).
//! The eigenvalue is `(16 pi^2 / 27)(m^2 + n^2 - mn)`.
//!
//! Normalization uses the tiling: the plane waves are orthogonal on the
//! fundamental parallelogram of the hexagonal torus (area `9 sqrt(3) / 2`), which is covered by 18 copies
//! of the triangle, so `kappa^2 = 18 / (|P| * sum of squared multiplicities)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Index, TwistedTorus};
use crate::quadrature::{self, TriangleRule};
use crate::scalar::SurdRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Neumann => "neumann",
            Self::Dirichlet => "dirichlet",
        })
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" | "n" => Ok(Self::Neumann),
            "dirichlet" | "d" => Ok(Self::Dirichlet),
            _ => Err(Error::InvalidArgument(format!("unknown boundary condition {s:?}"))),
        }
    }
}

/// `gamma` of the hexagonal torus and of the triangle spectrum, `16 pi^2 / 27`.
pub fn gamma_hex() -> f64 {
    16.0 * PI * PI / 27.0
}

/// `m^2 + n^2 - mn`.
pub fn level(m: i64, n: i64) -> u64 {
    (m * m + n * n - m * n) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub m: i64,
    pub n: i64,
    pub bc: BoundaryCondition,
}

/// Outcome of [`mode_admissibility`].
#[derive(Clone, Debug, PartialEq)]
pub enum Admissibility {
    Admissible { eigenvalue: f64 },
    Inadmissible { reason: String },
}

/// Whether `(m, n)` indexes a nonzero eigenmode for `bc`.
///
/// Neumann needs `3 | m + n`. Dirichlet additionally excludes every orbit that
/// meets a reflection axis (`m = 2n`, `n = 2m` or `m = -n`): there the
/// alternating sum cancels identically.
pub fn mode_admissibility(m: i64, n: i64, bc: BoundaryCondition) -> Admissibility {
    if (m + n).rem_euclid(3) != 0 {
        return Admissibility::Inadmissible {
            reason: format!("3 does not divide m + n = {}", m + n),
        };
    }
    if bc == BoundaryCondition::Dirichlet {
        let reason = if m == 2 * n {
            Some("m = 2n")
        } else if n == 2 * m {
            Some("n = 2m")
        } else if m == -n {
            Some("m = -n (orbit of an n = 2m mode)")
        } else {
            None
        };
        if let Some(r) = reason {
            return Admissibility::Inadmissible { reason: r.into() };
        }
    }
    Admissibility::Admissible {
        eigenvalue: gamma_hex() * level(m, n) as f64,
    }
}

fn check_admissible(m: i64, n: i64, bc: BoundaryCondition) -> Result<()> {
    match mode_admissibility(m, n, bc) {
        Admissibility::Admissible { .. } => Ok(()),
        Admissibility::Inadmissible { reason } => Err(Error::InadmissibleMode { m, n, bc, reason }),
    }
}

/// `k_{m,n} / pi = (2m/3, 2(2n - m) / (3 sqrt 3))`, exact.
pub fn wavevector_over_pi(m: i64, n: i64) -> [SurdRational; 2] {
    [
        SurdRational::from_ratio(2 * m, 3),
        SurdRational::surd(2 * (2 * n - m), 9, 3).expect("3 is squarefree"),
    ]
}

pub fn wavevector(m: i64, n: i64) -> [f64; 2] {
    let k = wavevector_over_pi(m, n);
    [PI * k[0].to_f64(), PI * k[1].to_f64()]
}

/// One orbit entry with its sign `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitEntry {
    pub index: Index,
    pub sign: i32,
}

/// Aggregated multiplicity of one distinct orbit member.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitTerm {
    pub index: Index,
    pub signed: i32,
    pub unsigned: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedOrbit {
    pub entries: [OrbitEntry; 6],
    /// Distinct members, sorted lexicographically.
    pub support: Vec<OrbitTerm>,
}

impl SignedOrbit {
    pub fn signed_sum(&self) -> i32 {
        self.entries.iter().map(|e| e.sign).sum()
    }

    pub fn contains(&self, idx: Index) -> bool {
        self.support.iter().any(|t| t.index == idx)
    }

    /// Lexicographically smallest member: the canonical class representative.
    pub fn representative(&self) -> Index {
        self.support[0].index
    }
}

pub fn s1(idx: Index) -> Index {
    [idx[0], idx[0] - idx[1]]
}

pub fn s2(idx: Index) -> Index {
    [idx[1] - idx[0], idx[1]]
}

/// `[(m,n), (m,m-n), (-n,m-n), (-n,-m), (n-m,-m), (n-m,n)]` with signs `+ - + - + -`.
pub fn signed_orbit(m: i64, n: i64) -> SignedOrbit {
    let list = [
        [m, n],
        [m, m - n],
        [-n, m - n],
        [-n, -m],
        [n - m, -m],
        [n - m, n],
    ];
    let entries = std::array::from_fn(|i| OrbitEntry {
        index: list[i],
        sign: if i % 2 == 0 { 1 } else { -1 },
    });
    let mut agg: BTreeMap<Index, (i32, u32)> = BTreeMap::new();
    for e in &entries {
        let slot = agg.entry(e.index).or_default();
        slot.0 += e.sign;
        slot.1 += 1;
    }
    let support = agg
        .into_iter()
        .map(|(index, (signed, unsigned))| OrbitTerm {
            index,
            signed,
            unsigned,
        })
        .collect();
    SignedOrbit { entries, support }
}

/// Canonical representative of the class of `(m, n)` under orbit equality.
pub fn class_representative(m: i64, n: i64) -> Index {
    signed_orbit(m, n).representative()
}

/// A plane-wave component `coeff * exp(i k . x)` of a mode (kappa included).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWave {
    pub index: Index,
    pub coeff: f64,
    pub k: [f64; 2],
}

/// A normalized eigenmode of the triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMode {
    pub index: ModeIndex,
    /// Canonical class representative; equal modes share it.
    pub class: Index,
    pub level: u64,
    pub eigenvalue: f64,
    pub orbit: SignedOrbit,
    /// Positive normalization factor.
    pub kappa: f64,
    /// `kappa^2` as an exact element of Q(sqrt 3).
    pub kappa_sq: SurdRational,
    /// +1 or -1; Dirichlet modes are oriented so that the class
    /// representative has a positive coefficient.
    pub orientation: i32,
    pub waves: Vec<PlaneWave>,
}

impl TriangleMode {
    pub fn new(m: i64, n: i64, bc: BoundaryCondition) -> Result<Self> {
        check_admissible(m, n, bc)?;
        let orbit = signed_orbit(m, n);
        let mult = |t: &OrbitTerm| match bc {
            BoundaryCondition::Neumann => t.unsigned as i32,
            BoundaryCondition::Dirichlet => t.signed,
        };
        let sum_sq: i64 = orbit.support.iter().map(|t| (mult(t) as i64).pow(2)).sum();
        debug_assert!(sum_sq > 0);
        // kappa^2 = 18 / (|P| sum_sq) with |P| = 9 sqrt(3)/2, i.e. 4 / (sqrt(3) sum_sq)
        let kappa_sq = SurdRational::surd(4, 3 * sum_sq, 3).expect("squarefree");
        let kappa = kappa_sq.to_f64().sqrt();
        let orientation = match bc {
            BoundaryCondition::Neumann => 1,
            BoundaryCondition::Dirichlet => mult(&orbit.support[0]).signum(),
        };
        let waves = orbit
            .support
            .iter()
            .filter(|t| mult(t) != 0)
            .map(|t| PlaneWave {
                index: t.index,
                coeff: kappa * (orientation * mult(t)) as f64,
                k: wavevector(t.index[0], t.index[1]),
            })
            .collect();
        let lvl = level(m, n);
        Ok(Self {
            index: ModeIndex { m, n, bc },
            class: orbit.representative(),
            level: lvl,
            eigenvalue: gamma_hex() * lvl as f64,
            orbit,
            kappa,
            kappa_sq,
            orientation,
            waves,
        })
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.index.bc
    }

    /// Value of the trigonometric sum at any point of the plane.
    pub fn eval_plane(&self, x: [f64; 2]) -> Complex64 {
        self.waves
            .iter()
            .map(|w| Complex64::from_polar(w.coeff, w.k[0] * x[0] + w.k[1] * x[1]))
            .sum()
    }

    pub fn gradient(&self, x: [f64; 2]) -> [Complex64; 2] {
        let mut g = [Complex64::new(0.0, 0.0); 2];
        for w in &self.waves {
            let e = Complex64::from_polar(w.coeff, w.k[0] * x[0] + w.k[1] * x[1]) * Complex64::i();
            g[0] += e * w.k[0];
            g[1] += e * w.k[1];
        }
        g
    }

    /// Laplacian computed term by term from the wavevectors.
    pub fn laplacian(&self, x: [f64; 2]) -> Complex64 {
        self.waves
            .iter()
            .map(|w| {
                let k2 = w.k[0] * w.k[0] + w.k[1] * w.k[1];
                Complex64::from_polar(w.coeff, w.k[0] * x[0] + w.k[1] * x[1]) * (-k2)
            })
            .sum()
    }

    /// Evaluates at points of the closed triangle.
    pub fn eval(&self, points: &[[f64; 2]]) -> Result<Vec<Complex64>> {
        points
            .iter()
            .map(|&p| {
                if in_closed_triangle(p, 1e-12) {
                    Ok(self.eval_plane(p))
                } else {
                    Err(Error::OutsideTriangle { x: p[0], y: p[1] })
                }
            })
            .collect()
    }

    /// `|k|` of the orbit (all members share it).
    pub fn wavenumber(&self) -> f64 {
        self.eigenvalue.sqrt()
    }
}

/// Membership in the closed triangle with slack `tol`.
pub fn in_closed_triangle(p: [f64; 2], tol: f64) -> bool {
    let s3 = 3f64.sqrt();
    p[1] >= -tol && p[1] <= s3 * p[0] + tol && p[1] <= s3 * (1.0 - p[0]) + tol
}

/// Distinct modes (one per class) with `level <= max_level`, ordered by level
/// and then by class representative.
pub fn modes_up_to(bc: BoundaryCondition, max_level: u64) -> Vec<TriangleMode> {
    let hex = TwistedTorus::hexagonal();
    let mut reps: Vec<(u64, Index)> = hex
        .enumerate_levels(max_level)
        .into_iter()
        .flat_map(|s| s.points)
        .filter(|&[m, n]| matches!(mode_admissibility(m, n, bc), Admissibility::Admissible { .. }))
        .filter(|&[m, n]| class_representative(m, n) == [m, n])
        .map(|[m, n]| (level(m, n), [m, n]))
        .collect();
    reps.sort();
    reps.into_iter()
        .map(|(_, [m, n])| TriangleMode::new(m, n, bc).expect("filtered admissible"))
        .collect()
}

/// The `count` lowest distinct levels' worth of modes.
pub fn lowest_modes(bc: BoundaryCondition, count: usize) -> Vec<TriangleMode> {
    let mut max_level = 16;
    loop {
        let modes = modes_up_to(bc, max_level);
        let mut levels: Vec<u64> = modes.iter().map(|m| m.level).collect();
        levels.dedup();
        if levels.len() > count {
            let cutoff = levels[count - 1];
            return modes.into_iter().filter(|m| m.level <= cutoff).collect();
        }
        max_level *= 2;
    }
}

/// A finite combination of triangle modes, keyed by class representative.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleField {
    pub bc: BoundaryCondition,
    pub coeffs: BTreeMap<Index, Complex64>,
}

impl TriangleField {
    pub fn zero(bc: BoundaryCondition) -> Self {
        Self {
            bc,
            coeffs: BTreeMap::new(),
        }
    }

    /// Sums `c * mode(m, n)`; indices in one class are merged.
    pub fn new(bc: BoundaryCondition, terms: impl IntoIterator<Item = (Index, Complex64)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for ([m, n], c) in terms {
            check_admissible(m, n, bc)?;
            *coeffs.entry(class_representative(m, n)).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Ok(Self { bc, coeffs })
    }

    pub fn single(m: i64, n: i64, bc: BoundaryCondition) -> Result<Self> {
        Self::new(bc, [([m, n], Complex64::new(1.0, 0.0))])
    }

    pub fn modes(&self) -> Vec<(TriangleMode, Complex64)> {
        self.coeffs
            .iter()
            .map(|(&[m, n], &c)| (TriangleMode::new(m, n, self.bc).expect("validated"), c))
            .collect()
    }

    /// Builds the modes on every call; use [`Self::evaluator`] for many points.
    pub fn eval_plane(&self, x: [f64; 2]) -> Complex64 {
        self.evaluator()(x)
    }

    /// Point evaluation with the modes built once.
    pub fn evaluator(&self) -> impl Fn([f64; 2]) -> Complex64 {
        let modes = self.modes();
        move |x| modes.iter().map(|(mode, c)| mode.eval_plane(x) * c).sum()
    }

    /// `||f||^2 = sum |c|^2` by orthonormality.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_level(&self) -> u64 {
        self.coeffs.keys().map(|&[m, n]| level(m, n)).max().unwrap_or(0)
    }

    /// Applies the Laplacian: each class coefficient times `-lambda`.
    pub fn laplacian(&self) -> Self {
        Self {
            bc: self.bc,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&k, &c)| (k, c * (-gamma_hex() * level(k[0], k[1]) as f64)))
                .collect(),
        }
    }
}

/// Samples of a function at the nodes of a triangle rule.
#[derive(Clone, Debug)]
pub struct TriangleSamples {
    pub rule: TriangleRule,
    pub values: Vec<Complex64>,
}

impl TriangleSamples {
    pub fn new(rule: TriangleRule, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::SampleCount {
                got: values.len(),
                expected: rule.len(),
            });
        }
        Ok(Self { rule, values })
    }

    pub fn from_fn(rule: TriangleRule, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = rule.nodes().iter().map(|&x| f(x)).collect();
        Self { rule, values }
    }

    /// Reads CSV rows `x,y,re[,im]` listed in the rule's node order; the
    /// coordinates must match the nodes of the rule of that size.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut pts = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Config(e.to_string()))?;
            let get = |i: usize| -> Result<f64> {
                rec.get(i)
                    .unwrap_or("0")
                    .parse()
                    .map_err(|_| Error::Config(format!("bad number in row {:?}", rec)))
            };
            pts.push([get(0)?, get(1)?]);
            let im = if rec.len() > 3 { get(3)? } else { 0.0 };
            values.push(Complex64::new(get(2)?, im));
        }
        let depth = (0..=quadrature_max_depth())
            .find(|&d| 7 * 4usize.pow(d) == pts.len())
            .ok_or(Error::SampleCount {
                got: pts.len(),
                expected: 7,
            })?;
        let rule = TriangleRule::with_depth(depth);
        for (i, (p, q)) in pts.iter().zip(rule.nodes()).enumerate() {
            if (p[0] - q[0]).abs() > 1e-9 || (p[1] - q[1]).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "row {i}: ({}, {}) is not the rule node ({}, {})",
                    p[0], p[1], q[0], q[1]
                )));
            }
        }
        Ok(Self { rule, values })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,re,im\n");
        for (p, v) in self.rule.nodes().iter().zip(&self.values) {
            s.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", p[0], p[1], v.re, v.im));
        }
        s
    }
}

fn quadrature_max_depth() -> u32 {
    9
}

/// Result of projecting samples onto the eigenbasis.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub field: TriangleField,
    /// `||f||^2` by quadrature.
    pub norm_sq: f64,
    /// `| ||f||^2 - sum |c|^2 | / ||f||^2` (0 for the zero function).
    pub parseval_defect: f64,
}

/// Coefficients `<f, mode>` for every class with `level <= max_level`.
///
/// The rule must resolve products of the highest modes involved; a coarser
/// rule is rejected as under-resolved.
pub fn decompose(samples: &TriangleSamples, bc: BoundaryCondition, max_level: u64) -> Result<Decomposition> {
    let modes = modes_up_to(bc, max_level);
    let kmax = (gamma_hex() * max_level as f64).sqrt();
    let required = 2.0 * kmax;
    let rule = &samples.rule;
    if rule.plane_wave_error(required.max(1.0)) >= quadrature::PLANE_WAVE_TOL {
        return Err(Error::UnderResolved {
            resolved: rule.resolved_wavenumber(),
            required,
        });
    }
    let nodes = rule.nodes();
    let weights = rule.weights();
    let norm_sq = quadrature::pairwise_sum(
        &samples
            .values
            .iter()
            .zip(weights)
            .map(|(v, w)| v.norm_sqr() * w)
            .collect::<Vec<_>>(),
    );
    let mut coeffs = BTreeMap::new();
    for mode in &modes {
        let terms: Vec<Complex64> = nodes
            .iter()
            .zip(weights)
            .zip(&samples.values)
            .map(|((&x, &w), v)| v * mode.eval_plane(x).conj() * w)
            .collect();
        coeffs.insert(mode.class, quadrature::pairwise_sum_complex(&terms));
    }
    let field = TriangleField { bc, coeffs };
    let captured = field.norm_sq();
    let parseval_defect = if norm_sq > 0.0 {
        (norm_sq - captured).abs() / norm_sq
    } else {
        0.0
    };
    Ok(Decomposition {
        field,
        norm_sq,
        parseval_defect,
    })
}

/// Mode table rows `m,n,bc,level,lambda,kappa`.
pub fn mode_table_csv(modes: &[TriangleMode]) -> String {
    let mut s = String::from("m,n,bc,level,lambda,kappa\n");
    for md in modes {
        s.push_str(&format!(
            "{},{},{},{},{:.17e},{:.17e}\n",
            md.index.m, md.index.n, md.index.bc, md.level, md.eigenvalue, md.kappa
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::triangle_area;
    use BoundaryCondition::*;

    #[test]
    fn admissibility_examples() {
        match mode_admissibility(1, 2, Neumann) {
            Admissibility::Admissible { eigenvalue } => {
                assert!((eigenvalue - 16.0 * PI * PI / 9.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(mode_admissibility(1, 2, Dirichlet), Admissibility::Inadmissible { .. }));
        assert!(matches!(mode_admissibility(1, 1, Neumann), Admissibility::Inadmissible { .. }));
        assert!(matches!(mode_admissibility(1, -1, Dirichlet), Admissibility::Inadmissible { .. }));
        assert!(matches!(mode_admissibility(0, 0, Dirichlet), Admissibility::Inadmissible { .. }));
        assert!(TriangleMode::new(1, 1, Neumann).is_err());
    }

    #[test]
    fn wavevector_examples() {
        let k = wavevector_over_pi(3, 0);
        assert_eq!(k[0], SurdRational::from_int(2));
        // -2/sqrt(3) = -(2/3) sqrt(3)
        assert_eq!(k[1], SurdRational::surd(-2, 3, 3).unwrap());
        assert_eq!(wavevector_over_pi(0, 0), [SurdRational::zero(), SurdRational::zero()]);
        // k_{1,2} . omega = 4 pi / 3, exactly
        let k = wavevector_over_pi(1, 2);
        let omega = [SurdRational::from_ratio(1, 2), SurdRational::surd(1, 2, 3).unwrap()];
        assert_eq!(&k[0] * &omega[0] + &k[1] * &omega[1], SurdRational::from_ratio(4, 3));
    }

    #[test]
    fn pairing_with_lattice_basis() {
        // k_{m,n} . (a e + b omega) = (2 pi / 3)(m a + n b)
        let e = [SurdRational::one(), SurdRational::zero()];
        let w = [SurdRational::from_ratio(1, 2), SurdRational::surd(1, 2, 3).unwrap()];
        for (m, n) in [(3, 0), (4, 2), (-5, 7), (1, 1)] {
            let k = wavevector_over_pi(m, n);
            let dot = |v: &[SurdRational; 2]| &k[0] * &v[0] + &k[1] * &v[1];
            assert_eq!(dot(&e), SurdRational::from_ratio(2 * m, 3));
            assert_eq!(dot(&w), SurdRational::from_ratio(2 * n, 3));
        }
    }

    #[test]
    fn orbit_examples() {
        let o = signed_orbit(3, 0);
        let got: Vec<(Index, i32)> = o.entries.iter().map(|e| (e.index, e.sign)).collect();
        assert_eq!(
            got,
            vec![([3, 0], 1), ([3, 3], -1), ([0, 3], 1), ([0, -3], -1), ([-3, -3], 1), ([-3, 0], -1)]
        );
        assert_eq!(o.support.len(), 6);

        let o = signed_orbit(1, 2);
        assert_eq!(o.support.len(), 3);
        for t in &o.support {
            assert_eq!((t.signed, t.unsigned), (0, 2));
        }
        assert_eq!(o.signed_sum(), 0);

        let o = signed_orbit(0, 0);
        assert_eq!(o.support.len(), 1);
        assert_eq!((o.support[0].signed, o.support[0].unsigned), (0, 6));
    }

    #[test]
    fn orbit_closed_under_generators() {
        for m in -6..=6 {
            for n in -6..=6 {
                let o = signed_orbit(m, n);
                for e in &o.entries {
                    assert!(o.contains(s1(e.index)) && o.contains(s2(e.index)));
                }
            }
        }
    }

    #[test]
    fn constant_mode_value() {
        let u = TriangleMode::new(0, 0, Neumann).unwrap();
        let want = (4.0 / 3f64.sqrt()).sqrt();
        for p in [[0.5, 0.2], [0.1, 0.05], [0.0, 0.0]] {
            assert!((u.eval_plane(p) - want).norm() < 1e-14);
        }
        assert!((want * want * triangle_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_vanishes_on_boundary() {
        for (m, n) in [(5, 1), (7, 2), (-4, 1), (8, 1)] {
            let v = TriangleMode::new(m, n, Dirichlet).unwrap();
            for p in quadrature::TRIANGLE {
                assert!(v.eval_plane(p).norm() < 1e-10);
            }
            // and along each edge
            for t in [0.13, 0.5, 0.77] {
                let [a, b, c] = quadrature::TRIANGLE;
                for (p, q) in [(a, b), (b, c), (c, a)] {
                    let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                    assert!(v.eval_plane(x).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn neumann_centroid_matches_direct_sum() {
        let u = TriangleMode::new(3, 0, Neumann).unwrap();
        let c = [0.5, 0.5 / 3f64.sqrt()];
        // direct six-term sum with kappa = sqrt(4 / (6 sqrt 3))
        let kappa = (4.0 / (6.0 * 3f64.sqrt())).sqrt();
        let direct: Complex64 = signed_orbit(3, 0)
            .entries
            .iter()
            .map(|e| {
                let k = wavevector(e.index[0], e.index[1]);
                Complex64::from_polar(kappa, k[0] * c[0] + k[1] * c[1])
            })
            .sum();
        assert!((u.eval_plane(c) - direct).norm() < 1e-14);
        assert!(u.eval(&[[2.0, 0.0]]).is_err());
    }

    #[test]
    fn class_members_agree() {
        for (m, n) in [(3, 0), (4, 2), (5, 1), (7, -1)] {
            for bc in [Neumann, Dirichlet] {
                let Ok(base) = TriangleMode::new(m, n, bc) else { continue };
                for e in base.orbit.entries {
                    let other = TriangleMode::new(e.index[0], e.index[1], bc).unwrap();
                    assert_eq!(other.class, base.class);
                    for p in [[0.3, 0.1], [0.7, 0.2], [0.5, 0.6]] {
                        assert!((other.eval_plane(p) - base.eval_plane(p)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn decompose_recovers_coefficients() {
        let rule = TriangleRule::for_wavenumber(2.0 * (gamma_hex() * 21.0).sqrt());
        let u = TriangleMode::new(3, 0, Neumann).unwrap();
        let s = TriangleSamples::from_fn(rule.clone(), |x| u.eval_plane(x));
        let d = decompose(&s, Neumann, 21).unwrap();
        for (k, c) in &d.field.coeffs {
            let want = if *k == u.class { 1.0 } else { 0.0 };
            assert!((c - want).norm() < 1e-8, "{k:?}: {c}");
        }
        assert!(d.parseval_defect < 1e-8);

        let zero = TriangleSamples::from_fn(rule.clone(), |_| Complex64::new(0.0, 0.0));
        let d = decompose(&zero, Neumann, 21).unwrap();
        assert!(d.field.coeffs.values().all(|c| c.norm() == 0.0));

        let v42 = TriangleMode::new(4, 2, Dirichlet);
        assert!(v42.is_err(), "(4,2) has m = 2n");
        let a = TriangleMode::new(5, 1, Dirichlet).unwrap();
        let b = TriangleMode::new(7, 2, Dirichlet).unwrap();
        let s = TriangleSamples::from_fn(rule.clone(), |x| a.eval_plane(x) * 2.0 + b.eval_plane(x) * 3.0);
        let d = decompose(&s, Dirichlet, 39);
        assert!(matches!(d, Err(Error::UnderResolved { .. })));
        let fine = TriangleRule::for_wavenumber(2.0 * (gamma_hex() * 39.0).sqrt());
        let s = TriangleSamples::from_fn(fine, |x| a.eval_plane(x) * 2.0 + b.eval_plane(x) * 3.0);
        let d = decompose(&s, Dirichlet, 39).unwrap();
        assert!((d.field.coeffs[&a.class] - 2.0).norm() < 1e-8);
        assert!((d.field.coeffs[&b.class] - 3.0).norm() < 1e-8);
    }

    #[test]
    fn samples_csv_round_trip() {
        let rule = TriangleRule::with_depth(1);
        let s = TriangleSamples::from_fn(rule, |x| Complex64::new(x[0], x[1]));
        let back = TriangleSamples::from_csv(&s.to_csv()).unwrap();
        assert_eq!(back.values, s.values);
    }
}
