//! Gramian probes of the observability inequality
//! `int_0^T int a |e^{it Delta} u0|^2 >= C ||u0||^2` on finite mode sets.
//!
//! For `u0 = sum_k c_k e_k` the left side is `c^* G c` with
//! `G[j,k] = tau(lambda_j - lambda_k) * int a conj(e_j) e_k` and
//! `tau(w) = int_0^T exp(i w t) dt`. The smallest eigenvalue of `G` is the
//! best constant on the span of the modes. Eigenvalues are integer multiples
//! of `gamma`, so `tau` is evaluated in closed form.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::grid_nodes;
use crate::lattice::{Index, TwistedTorus};
use crate::propagator::moment;
use crate::quadrature::{pairwise_sum, TriangleRule};
use crate::tiling::{extend_hex, from_cartesian, PullbackRule};
use crate::triangle::{gamma_hex, lowest_modes, BoundaryCondition, TriangleField, TriangleMode};

/// Tolerance for the Rayleigh-quotient re-check of the certificate.
pub const CERTIFICATE_TOL: f64 = 1e-10;

/// The orthonormal functions spanning the truncation set.
#[derive(Clone, Debug)]
pub enum Basis {
    Torus { torus: Arc<TwistedTorus>, modes: Vec<Index> },
    Triangle { bc: BoundaryCondition, modes: Vec<TriangleMode> },
}

impl Basis {
    /// Every index of the `levels` lowest torus shells.
    pub fn torus_lowest(torus: Arc<TwistedTorus>, levels: usize) -> Self {
        let modes = torus.lowest_levels(levels);
        Self::Torus { torus, modes }
    }

    /// One mode per class, from the `levels` lowest triangle levels.
    pub fn triangle_lowest(bc: BoundaryCondition, levels: usize) -> Self {
        Self::Triangle {
            bc,
            modes: lowest_modes(bc, levels),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Torus { modes, .. } => modes.len(),
            Self::Triangle { modes, .. } => modes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integer levels; eigenvalues are `gamma * level`.
    pub fn levels(&self) -> Vec<u64> {
        match self {
            Self::Torus { torus, modes } => modes.iter().map(|&n| torus.level(n)).collect(),
            Self::Triangle { modes, .. } => modes.iter().map(|m| m.level).collect(),
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Self::Torus { torus, .. } => torus.gamma_f64(),
            Self::Triangle { .. } => gamma_hex(),
        }
    }

    /// Labels: torus index or triangle class representative.
    pub fn labels(&self) -> Vec<Index> {
        match self {
            Self::Torus { modes, .. } => modes.clone(),
            Self::Triangle { modes, .. } => modes.iter().map(|m| m.class).collect(),
        }
    }

    /// Number of leading modes covering the `levels` lowest distinct levels.
    pub fn prefix_for_levels(&self, levels: usize) -> usize {
        let lv = self.levels();
        let mut seen = 0;
        for (i, w) in lv.windows(2).enumerate() {
            if w[0] != w[1] {
                seen += 1;
                if seen == levels {
                    return i + 1;
                }
            }
        }
        lv.len()
    }

    fn check(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyModes);
        }
        let mut labels = self.labels();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("mode {:?} listed twice", w[0])));
        }
        let lv = self.levels();
        if lv.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("modes must be ordered by level".into()));
        }
        Ok(())
    }

    fn eval(&self, k: usize, x: [f64; 2]) -> Complex64 {
        match self {
            Self::Torus { torus, modes } => {
                Complex64::from_polar(1.0 / torus.det_f64().sqrt(), torus.phase(modes[k], x))
            }
            Self::Triangle { modes, .. } => modes[k].eval_plane(x),
        }
    }
}

/// A sampled localization function: Cartesian nodes, quadrature weights and
/// the values of `a` at the nodes.
#[derive(Clone, Debug)]
pub struct Sampling {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl Sampling {
    /// The periodic `m x m` grid in lattice coordinates; `a` takes lattice
    /// coordinates in `[0,1)^2`.
    pub fn torus_grid(torus: &TwistedTorus, m: usize, a: impl Fn([f64; 2]) -> f64) -> Self {
        let s = grid_nodes(m);
        let w = torus.det_f64() / (m * m) as f64;
        Self {
            nodes: s.iter().map(|&p| torus.to_cartesian(p)).collect(),
            weights: vec![w; s.len()],
            values: s.into_iter().map(a).collect(),
        }
    }

    /// The triangle rule; `a` takes Cartesian points of the triangle.
    pub fn triangle(rule: &TriangleRule, a: impl Fn([f64; 2]) -> f64) -> Self {
        Self {
            nodes: rule.nodes().to_vec(),
            weights: rule.weights().to_vec(),
            values: rule.nodes().iter().map(|&x| a(x)).collect(),
        }
    }

    /// The triangle rule with values given per node (e.g. from CSV).
    pub fn triangle_values(rule: &TriangleRule, values: Vec<f64>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::SampleCount {
                got: values.len(),
                expected: rule.len(),
            });
        }
        Ok(Self {
            nodes: rule.nodes().to_vec(),
            weights: rule.weights().to_vec(),
            values,
        })
    }

    /// The hexagonal-torus rule pulled back from the triangle; `a` sees the
    /// tile `(g, p)` and the triangle node index.
    pub fn pullback(rule: &PullbackRule, a: impl Fn(usize, u8, usize) -> f64) -> Self {
        Self {
            nodes: rule.nodes.clone(),
            weights: (0..rule.nodes.len()).map(|i| rule.weight(i)).collect(),
            values: rule.origin.iter().map(|&(g, p, i)| a(g, p, i)).collect(),
        }
    }

    /// The same sampling with `a` replaced by `c a`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// `int a`.
    pub fn mass(&self) -> f64 {
        let v: Vec<f64> = self.weights.iter().zip(&self.values).map(|(w, a)| w * a).collect();
        pairwise_sum(&v)
    }

    fn check(&self) -> Result<()> {
        if self.values.len() != self.nodes.len() || self.weights.len() != self.nodes.len() {
            return Err(Error::SampleCount {
                got: self.values.len(),
                expected: self.nodes.len(),
            });
        }
        for (index, &value) in self.values.iter().enumerate() {
            if value.is_nan() || value < 0.0 {
                return Err(Error::NegativeSample { index, value });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ObservabilityProblem {
    pub basis: Basis,
    pub sampling: Sampling,
    pub t: f64,
}

impl ObservabilityProblem {
    pub fn new(basis: Basis, sampling: Sampling, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("time horizon must be positive, got {t}")));
        }
        basis.check()?;
        sampling.check()?;
        Ok(Self { basis, sampling, t })
    }

    /// `S[j,k] = int a conj(e_j) e_k`, Hermitian by construction.
    fn spatial_matrix(&self) -> DMatrix<Complex64> {
        let k = self.basis.len();
        let active: Vec<(usize, f64)> = self
            .sampling
            .values
            .iter()
            .zip(&self.sampling.weights)
            .enumerate()
            .filter(|(_, (a, _))| **a > 0.0)
            .map(|(i, (a, w))| (i, (a * w).sqrt()))
            .collect();
        let rows: Vec<Vec<Complex64>> = active
            .par_iter()
            .map(|&(i, r)| {
                let x = self.sampling.nodes[i];
                (0..k).map(|j| self.basis.eval(j, x) * r).collect()
            })
            .collect();
        let b = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
        let mut s = b.adjoint() * &b;
        hermitize(&mut s);
        s
    }

    /// Time factors `tau(gamma (l_j - l_k))`, exactly `T` for equal levels.
    fn time_matrix(&self) -> DMatrix<Complex64> {
        let lv = self.basis.levels();
        let gamma = self.basis.gamma();
        let n = lv.len();
        let t = self.t;
        let entries: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (j, k) = (idx / n, idx % n);
                if lv[j] == lv[k] {
                    Complex64::new(t, 0.0)
                } else {
                    let w = gamma * (lv[j] as i64 - lv[k] as i64) as f64;
                    moment(0, -w, t)
                }
            })
            .collect();
        DMatrix::from_fn(n, n, |j, k| entries[j * n + k])
    }
}

fn hermitize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)] = Complex64::new(m[(j, j)].re, 0.0);
        for k in j + 1..n {
            m[(k, j)] = m[(j, k)].conj();
        }
    }
}

#[derive(Clone, Debug)]
pub struct GramianReport {
    pub matrix: DMatrix<Complex64>,
    pub lambda_min: f64,
    /// Unit vector with `c^* G c = lambda_min`; its largest entry is real
    /// and positive (first one on ties).
    pub certificate: Vec<Complex64>,
    /// `c^* G c` recomputed from the certificate.
    pub rayleigh: f64,
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

impl GramianReport {
    pub fn certified(&self) -> bool {
        (self.rayleigh - self.lambda_min).abs() <= CERTIFICATE_TOL * self.scale()
    }

    fn scale(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0).abs().max(1.0)
    }

    /// Largest `|G - G^*|` entry.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> GramianSummary {
        GramianSummary {
            size: self.matrix.nrows(),
            lambda_min: self.lambda_min,
            rayleigh: self.rayleigh,
            certified: self.certified(),
            certificate: self.certificate.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramianSummary {
    pub size: usize,
    #[serde(rename = "lambdaMin")]
    pub lambda_min: f64,
    pub rayleigh: f64,
    pub certified: bool,
    pub certificate: Vec<[f64; 2]>,
}

pub fn gramian(problem: &ObservabilityProblem) -> GramianReport {
    let s = problem.spatial_matrix();
    let tau = problem.time_matrix();
    let mut g = s.component_mul(&tau);
    hermitize(&mut g);
    smallest_eigenpair(g)
}

fn smallest_eigenpair(g: DMatrix<Complex64>) -> GramianReport {
    let eig = g.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let imin = order[0];
    let mut c: Vec<Complex64> = eig.eigenvectors.column(imin).iter().copied().collect();
    normalize_certificate(&mut c);
    let rayleigh = rayleigh_quotient(&g, &c);
    GramianReport {
        lambda_min: eig.eigenvalues[imin],
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        matrix: g,
        certificate: c,
        rayleigh,
    }
}

/// Unit norm, largest entry rotated onto the positive real axis.
fn normalize_certificate(c: &mut [Complex64]) {
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let big = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = c.iter().position(|z| z.norm() >= big * (1.0 - 1e-12)).unwrap_or(0);
    let phase = if c[pivot].norm() > 0.0 { c[pivot].conj() / c[pivot].norm() } else { Complex64::new(1.0, 0.0) };
    for z in c.iter_mut() {
        *z = *z * phase / norm;
    }
}

/// `c^* G c / c^* c`.
pub fn rayleigh_quotient(g: &DMatrix<Complex64>, c: &[Complex64]) -> f64 {
    let v = DVector::from_column_slice(c);
    let num = (v.adjoint() * g * &v)[(0, 0)];
    num.re / v.norm_squared()
}

/// `int_0^T int a |e^{it Delta} u0|^2` for `u0 = sum c_k e_k`, by composite
/// Simpson in time with `steps` (even) intervals. Independent of the closed-form
/// time factors; meant for small problems.
pub fn observed_energy(problem: &ObservabilityProblem, c: &[Complex64], steps: usize) -> f64 {
    let steps = steps + steps % 2;
    let lv = problem.basis.levels();
    let gamma = problem.basis.gamma();
    let s = &problem.sampling;
    let phi: Vec<Vec<Complex64>> = s
        .nodes
        .iter()
        .map(|&x| (0..lv.len()).map(|k| problem.basis.eval(k, x)).collect())
        .collect();
    let h = problem.t / steps as f64;
    let at = |t: f64| {
        let amp: Vec<Complex64> = lv
            .iter()
            .zip(c)
            .map(|(&l, &ck)| ck * Complex64::from_polar(1.0, -gamma * l as f64 * t))
            .collect();
        let v: Vec<f64> = phi
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let u: Complex64 = row.iter().zip(&amp).map(|(p, a)| p * a).sum();
                s.weights[i] * s.values[i] * u.norm_sqr()
            })
            .collect();
        pairwise_sum(&v)
    };
    let mut total = at(0.0) + at(problem.t);
    for i in 1..steps {
        total += if i % 2 == 1 { 4.0 } else { 2.0 } * at(i as f64 * h);
    }
    total * h / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    pub levels: usize,
    pub modes: usize,
    #[serde(rename = "lambdaMin")]
    pub lambda_min: f64,
}

/// `lambda_min` on the nested sets of the `N` lowest levels of the problem's
/// basis, for each `N` in `truncations`. The Gramian is assembled once and
/// each truncation is a leading principal block, so the profile is
/// nonincreasing up to eigen-solver round-off.
pub fn observability_profile(problem: &ObservabilityProblem, truncations: &[usize]) -> Result<Vec<ProfileRow>> {
    if truncations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("truncations must be increasing".into()));
    }
    if truncations.first() == Some(&0) {
        return Err(Error::EmptyModes);
    }
    let full = gramian(problem).matrix;
    Ok(truncations
        .iter()
        .map(|&n| {
            let k = problem.basis.prefix_for_levels(n);
            let block = full.view((0, 0), (k, k)).into_owned();
            ProfileRow {
                levels: n,
                modes: k,
                lambda_min: smallest_eigenpair(block).lambda_min,
            }
        })
        .collect())
}

/// Named localization functions on the triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrianglePreset {
    One,
    /// The corner `{a + b <= 1/4}` in lattice coordinates (area 1/16).
    Subtriangle,
    /// `{x < 1/2}`.
    Half,
}

impl TrianglePreset {
    pub fn value(self, x: [f64; 2]) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Subtriangle => {
                let [a, b] = from_cartesian(x);
                f64::from(a + b <= 0.25)
            }
            Self::Half => f64::from(x[0] < 0.5),
        }
    }

    pub fn sampling(self, rule: &TriangleRule) -> Sampling {
        Sampling::triangle(rule, |x| self.value(x))
    }
}

impl std::str::FromStr for TrianglePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(Self::One),
            "subtriangle" => Ok(Self::Subtriangle),
            "half" => Ok(Self::Half),
            _ => Err(Error::InvalidArgument(format!("unknown triangle preset {s:?}"))),
        }
    }
}

/// Middle-gap Cantor set on `[0,1)`: stage `k = 1..=stages` removes the
/// open middle fraction `theta 2^{1-k}` of every remaining interval. The
/// limit set has empty interior and measure `prod (1 - theta 2^{1-k})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FatCantor {
    pub stages: u32,
    pub theta: f64,
}

impl FatCantor {
    pub const DEFAULT_STAGES: u32 = 6;

    /// The product set `C x C` in lattice coordinates with normalized area
    /// `target`; `theta` found by bisection.
    pub fn with_product_measure(target: f64, stages: u32) -> Result<Self> {
        if !(target > 0.0 && target < 1.0) || stages == 0 {
            return Err(Error::InvalidArgument(format!(
                "fat Cantor needs 0 < measure < 1 and at least one stage, got {target}, {stages}"
            )));
        }
        let want = target.sqrt();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (Self { stages, theta: mid }).measure_1d() > want {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self {
            stages,
            theta: 0.5 * (lo + hi),
        })
    }

    pub fn measure_1d(&self) -> f64 {
        (1..=self.stages).map(|k| 1.0 - self.theta * 0.5f64.powi(k as i32 - 1)).product()
    }

    pub fn product_measure(&self) -> f64 {
        self.measure_1d().powi(2)
    }

    pub fn contains(&self, x: f64) -> bool {
        let x = x - x.floor();
        let (mut lo, mut len) = (0.0, 1.0);
        for k in 1..=self.stages {
            let keep = 0.5 * len * (1.0 - self.theta * 0.5f64.powi(k as i32 - 1));
            let r = x - lo;
            if r < keep {
                len = keep;
            } else if r >= len - keep {
                lo += len - keep;
                len = keep;
            } else {
                return false;
            }
        }
        true
    }

    pub fn indicator(&self, s: [f64; 2]) -> f64 {
        f64::from(self.contains(s[0]) && self.contains(s[1]))
    }
}

/// Named localization functions on a torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TorusPreset {
    One,
    /// The hexagon around the origin made of the six untranslated tiles
    /// (hexagonal torus only).
    Hexagon,
    /// `C x C` from [`FatCantor`] with normalized measure 0.1.
    FatCantor,
}

impl TorusPreset {
    pub const FAT_CANTOR_MEASURE: f64 = 0.1;

    /// Samples the preset. The grid presets use an `m x m` grid; the hexagon
    /// uses the pulled-back triangle rule resolving `wavenumber`.
    pub fn sampling(self, torus: &TwistedTorus, m: usize, wavenumber: f64) -> Result<Sampling> {
        match self {
            Self::One => Ok(Sampling::torus_grid(torus, m, |_| 1.0)),
            Self::FatCantor => {
                let c = FatCantor::with_product_measure(Self::FAT_CANTOR_MEASURE, FatCantor::DEFAULT_STAGES)?;
                Ok(Sampling::torus_grid(torus, m, |s| c.indicator(s)))
            }
            Self::Hexagon => {
                if torus.matrix() != TwistedTorus::hexagonal().matrix() {
                    return Err(Error::TorusMismatch);
                }
                let rule = PullbackRule::new(TriangleRule::for_wavenumber(wavenumber));
                Ok(Sampling::pullback(&rule, |_, p, _| f64::from(p == 0)))
            }
        }
    }
}

impl std::str::FromStr for TorusPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(Self::One),
            "hexagon" => Ok(Self::Hexagon),
            "fat-cantor" | "fatcantor" => Ok(Self::FatCantor),
            _ => Err(Error::InvalidArgument(format!("unknown torus preset {s:?}"))),
        }
    }
}

/// Largest wavenumber in a basis, for sizing quadratures.
pub fn max_wavenumber(basis: &Basis) -> f64 {
    let top = basis.levels().last().copied().unwrap_or(0);
    (basis.gamma() * top as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferCheck {
    pub triangle_value: f64,
    pub torus_value: f64,
    /// `torus / triangle`; `None` when both vanish.
    pub ratio: Option<f64>,
    pub exact_zero: bool,
}

impl TransferCheck {
    pub fn passes(&self, tol: f64) -> bool {
        match self.ratio {
            Some(r) => (r - 18.0).abs() <= tol * 18.0,
            None => self.exact_zero,
        }
    }
}

/// Observed energy of `f` under the triangle flow with localization `a`
/// (values on the nodes of `rule`), against the same quantity for the
/// extension `E f` on the hexagonal torus with `a` extended by reflection.
pub fn triangle_torus_transfer_check(f: &TriangleField, rule: &TriangleRule, a: &[f64], t: f64) -> Result<TransferCheck> {
    let tri_sampling = Sampling::triangle_values(rule, a.to_vec())?;
    tri_sampling.check()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time horizon must be positive, got {t}")));
    }
    let support: Vec<(TriangleMode, Complex64)> = f.modes().into_iter().filter(|(_, c)| c.norm() > 0.0).collect();
    if support.is_empty() {
        return Ok(TransferCheck {
            triangle_value: 0.0,
            torus_value: 0.0,
            ratio: None,
            exact_zero: true,
        });
    }
    let mut support = support;
    support.sort_by_key(|(m, _)| (m.level, m.class));
    let coeffs: Vec<Complex64> = support.iter().map(|(_, c)| *c).collect();
    let tri = ObservabilityProblem::new(
        Basis::Triangle {
            bc: f.bc,
            modes: support.into_iter().map(|(m, _)| m).collect(),
        },
        tri_sampling,
        t,
    )?;
    let triangle_value = quadratic_form(&gramian(&tri).matrix, &coeffs);

    let ext = extend_hex(f);
    let torus = ext.torus_arc().clone();
    let mut amps: Vec<(Index, Complex64)> = ext.amps().iter().map(|(&n, &c)| (n, c)).collect();
    amps.sort_by_key(|(n, _)| (torus.level(*n), *n));
    let pull = PullbackRule::new(rule.clone());
    let torus_problem = ObservabilityProblem::new(
        Basis::Torus {
            torus,
            modes: amps.iter().map(|(n, _)| *n).collect(),
        },
        Sampling::pullback(&pull, |_, _, i| a[i]),
        t,
    )?;
    let b: Vec<Complex64> = amps.iter().map(|(_, c)| *c).collect();
    let torus_value = quadratic_form(&gramian(&torus_problem).matrix, &b);
    let exact_zero = triangle_value == 0.0 && torus_value == 0.0;
    Ok(TransferCheck {
        triangle_value,
        torus_value,
        ratio: (triangle_value != 0.0).then(|| torus_value / triangle_value),
        exact_zero,
    })
}

fn quadratic_form(g: &DMatrix<Complex64>, c: &[Complex64]) -> f64 {
    let v = DVector::from_column_slice(c);
    (v.adjoint() * g * &v)[(0, 0)].re
}
