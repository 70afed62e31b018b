//! Constants of the one-dimensional reduction of the flow on a rational torus.
//!
//! Writing `lambda_{i,j}` for the eigenvalue of the index `(i, j)` and
//! working in units of `pi^2` (every eigenvalue is a rational multiple of
//! `pi^2` on a rational torus), the reduction uses
//!
//! * `Lambda = lambda_{1,0} / 4 pi^2`,
//! * `alpha = (lambda_{0,1} + lambda_{1,0} - lambda_{1,1}) / (2 lambda_{1,0})`,
//! * `beta = lambda_{0,1} / 4 pi^2 - (lambda_{0,1} + lambda_{1,0} - lambda_{1,1})^2 / (16 pi^2 lambda_{1,0})`,
//!
//! so that `w = v exp(i alpha k x + i beta k^2 t)` turns
//! `i v_t + psi_A(d_x, -ik) v = 0` into the free equation
//! `i w_t + Lambda w_xx = 0` on `R / mu Z`, `mu` the denominator of `alpha`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Index, TwistedTorus};
use crate::scalar::{rational_string, SurdRational};

/// Eigenvalue of index `n` divided by `pi^2`, exactly.
fn ell(torus: &TwistedTorus, n: Index) -> BigRational {
    torus.gamma_coeff() * BigRational::from_integer(BigInt::from(torus.level(n)))
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionConstants {
    pub lambda: BigRational,
    pub alpha: BigRational,
    pub beta: BigRational,
    pub mu: BigInt,
    pub q0: BigInt,
    /// `psi_A(xi, eta) = psi[0] xi^2 + psi[1] xi eta + psi[2] eta^2`.
    pub psi: [BigRational; 3],
}

/// String form for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    #[serde(rename = "Lambda")]
    pub lambda: String,
    pub alpha: String,
    pub beta: String,
    pub mu: String,
    pub q0: String,
    pub psi: [String; 3],
}

impl ReductionConstants {
    pub fn report(&self) -> ReductionReport {
        ReductionReport {
            lambda: rational_string(&self.lambda),
            alpha: rational_string(&self.alpha),
            beta: rational_string(&self.beta),
            mu: self.mu.to_string(),
            q0: self.q0.to_string(),
            psi: self.psi.clone().map(|v| rational_string(&v)),
        }
    }

    /// `psi_A(n)`, so that `4 pi^2 psi_A(n) = lambda_n`.
    pub fn psi_at(&self, n: Index) -> BigRational {
        let (x, y) = (q(n[0], 1), q(n[1], 1));
        &self.psi[0] * &x * &x + &self.psi[1] * &x * &y + &self.psi[2] * &y * &y
    }

    pub fn lambda_f64(&self) -> f64 {
        to_f64(&self.lambda)
    }

    pub fn alpha_f64(&self) -> f64 {
        to_f64(&self.alpha)
    }

    pub fn beta_f64(&self) -> f64 {
        to_f64(&self.beta)
    }

    pub fn mu_u64(&self) -> u64 {
        self.mu.to_u64().expect("small period")
    }
}

fn to_f64(x: &BigRational) -> f64 {
    SurdRational::rational(x.clone()).to_f64()
}

/// All reduction constants from the three eigenvalues `lambda_{1,0}`,
/// `lambda_{0,1}`, `lambda_{1,1}`.
pub fn conjugation_constants(torus: &TwistedTorus) -> ReductionConstants {
    let (l10, l01, l11) = (ell(torus, [1, 0]), ell(torus, [0, 1]), ell(torus, [1, 1]));
    let four = q(4, 1);
    let cross = &l01 + &l10 - &l11;
    let lambda = &l10 / &four;
    let alpha = &cross / (q(2, 1) * &l10);
    let beta = &l01 / &four - &cross * &cross / (q(16, 1) * &l10);
    let psi = [&l10 / &four, (&l11 - &l01 - &l10) / &four, &l01 / &four];
    ReductionConstants {
        mu: alpha.denom().clone(),
        q0: q0_for_periodicity(torus),
        lambda,
        alpha,
        beta,
        psi,
    }
}

/// Coefficients `(c1, c2)` with `e2^{-1} e1^2 = c1 e1 + c2 e2` (complex
/// product), from the Gram form: `c1 = -2 Q12 / Q11`, `c2 = -Q22 / Q11`.
pub fn rotation_coefficients(torus: &TwistedTorus) -> [BigRational; 2] {
    let g = torus.gram();
    [-(q(2, 1) * &g[0][1]) / &g[0][0], -(&g[1][1] / &g[0][0])]
}

/// The same coefficients computed directly with complex arithmetic over
/// Q(sqrt d): `w = e1^2 conj(e2) / |e2|^2`, then `(c1, c2) = A^{-1} w`.
pub fn rotation_coefficients_complex(torus: &TwistedTorus) -> Result<[SurdRational; 2]> {
    let [e1, e2] = torus.generators();
    let mul = |a: &[SurdRational; 2], b: &[SurdRational; 2]| -> Result<[SurdRational; 2]> {
        Ok([
            a[0].checked_mul(&b[0])?.checked_sub(&a[1].checked_mul(&b[1])?)?,
            a[0].checked_mul(&b[1])?.checked_add(&a[1].checked_mul(&b[0])?)?,
        ])
    };
    let sq = mul(&e1, &e1)?;
    let conj2 = [e2[0].clone(), -&e2[1]];
    let norm2 = e2[0].checked_mul(&e2[0])?.checked_add(&e2[1].checked_mul(&e2[1])?)?;
    let num = mul(&sq, &conj2)?;
    let w = [num[0].checked_div(&norm2)?, num[1].checked_div(&norm2)?];
    let inv = torus.inverse();
    Ok([
        inv[0][0].checked_mul(&w[0])?.checked_add(&inv[0][1].checked_mul(&w[1])?)?,
        inv[1][0].checked_mul(&w[0])?.checked_add(&inv[1][1].checked_mul(&w[1])?)?,
    ])
}

/// `lcm` of the denominators of the rotation coefficients.
pub fn q0_for_periodicity(torus: &TwistedTorus) -> BigInt {
    let [c1, c2] = rotation_coefficients(torus);
    c1.denom().lcm(c2.denom())
}

/// `k (c1, c2)` has integer entries.
pub fn satisfies_rotation(torus: &TwistedTorus, k: &BigInt) -> bool {
    let kk = BigRational::from_integer(k.clone());
    rotation_coefficients(torus).iter().all(|c| (c * &kk).is_integer())
}

/// `q0` satisfies the rotation condition and no smaller positive integer does.
pub fn q0_is_minimal(torus: &TwistedTorus) -> bool {
    let q0 = q0_for_periodicity(torus);
    if !satisfies_rotation(torus, &q0) {
        return false;
    }
    let mut k = BigInt::one();
    while k < q0 {
        if satisfies_rotation(torus, &k) {
            return false;
        }
        k += 1;
    }
    true
}

/// A unit direction `A m / |A m|` with its primitive integer vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Direction {
    pub m: Index,
    pub v: [f64; 2],
}

/// Directions of the primitive lattice vectors with `max |m_i| <= n`, in
/// lexicographic order of `m`.
pub fn rational_directions(torus: &TwistedTorus, n: i64) -> Vec<Direction> {
    let mut out = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            if a.gcd(&b) != 1 {
                continue;
            }
            let x = torus.to_cartesian([a as f64, b as f64]);
            let r = x[0].hypot(x[1]);
            out.push(Direction {
                m: [a, b],
                v: [x[0] / r, x[1] / r],
            });
        }
    }
    out
}

/// One term `c exp(2 pi i j x)` of the initial data of `v`.
pub type Mode1d = (i64, Complex64);

/// Outcome of [`verify_conjugated_flow`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugatedFlowReport {
    /// `max |i w_t + Lambda w_xx|` with analytic derivatives.
    pub residual: f64,
    /// The same residual with centered differences on the grid.
    pub residual_fd: f64,
    /// `max |w(x + mu, t) - w(x, t)|`.
    pub periodicity_defect: f64,
    /// `max |i v_t + psi_A(d_x, -ik) v|` for `v` itself.
    pub v_residual: f64,
    pub mu: u64,
    pub grid: usize,
    pub t_max: f64,
}

struct Flow {
    q11: f64,
    q12: f64,
    q22: f64,
    lambda: f64,
    alpha: f64,
    beta: f64,
    k: f64,
    data: Vec<(f64, Complex64)>,
}

impl Flow {
    fn sigma(&self, xi: f64) -> f64 {
        self.q11 * xi * xi - 2.0 * self.q12 * self.k * xi + self.q22 * self.k * self.k
    }

    /// `(v, v_t, v_x, v_xx)` at `(x, t)`.
    fn v(&self, x: f64, t: f64) -> [Complex64; 4] {
        let mut out = [Complex64::default(); 4];
        for &(xi, c) in &self.data {
            let s = self.sigma(xi);
            let e = c * Complex64::from_polar(1.0, xi * x - s * t);
            out[0] += e;
            out[1] += e * Complex64::new(0.0, -s);
            out[2] += e * Complex64::new(0.0, xi);
            out[3] += e * (-xi * xi);
        }
        out
    }

    fn phase(&self, x: f64, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.alpha * self.k * x + self.beta * self.k * self.k * t)
    }

    fn w(&self, x: f64, t: f64) -> Complex64 {
        self.v(x, t)[0] * self.phase(x, t)
    }

    /// `i w_t + Lambda w_xx` by the product rule.
    fn residual(&self, x: f64, t: f64) -> Complex64 {
        let [v, vt, vx, vxx] = self.v(x, t);
        let ak = self.alpha * self.k;
        let i = Complex64::i();
        let wt = vt + i * self.beta * self.k * self.k * v;
        let wxx = vxx + i * 2.0 * ak * vx - ak * ak * v;
        (i * wt + wxx * self.lambda) * self.phase(x, t)
    }

    /// `i v_t + psi_A(d_x, -ik) v`.
    fn v_residual(&self, x: f64, t: f64) -> Complex64 {
        let [v, vt, vx, vxx] = self.v(x, t);
        let i = Complex64::i();
        i * vt + vxx * self.q11 + vx * (-i * 2.0 * self.q12 * self.k) - v * (self.q22 * self.k * self.k)
    }
}

/// Builds `v` spectrally from `data` (on `R / Z`), conjugates it to `w` and
/// measures the free-equation residual on a `grid x grid` sample of
/// `[0, mu) x [0, t_max]`. `k` must be a multiple of `2 pi`.
pub fn verify_conjugated_flow(
    torus: &TwistedTorus,
    k: f64,
    data: &[Mode1d],
    grid: usize,
    t_max: Option<f64>,
) -> Result<ConjugatedFlowReport> {
    let ratio = k / (2.0 * PI);
    if !k.is_finite() || (ratio - ratio.round()).abs() > 1e-9 {
        return Err(Error::NotLatticeWavenumber(k));
    }
    if grid < 3 {
        return Err(Error::InvalidArgument("verification grid needs at least 3 points".into()));
    }
    let c = conjugation_constants(torus);
    let g = torus.gram();
    let flow = Flow {
        q11: to_f64(&g[0][0]),
        q12: to_f64(&g[0][1]),
        q22: to_f64(&g[1][1]),
        lambda: c.lambda_f64(),
        alpha: c.alpha_f64(),
        beta: c.beta_f64(),
        k: 2.0 * PI * ratio.round(),
        data: data.iter().map(|&(j, a)| (2.0 * PI * j as f64, a)).collect(),
    };
    let mu = c.mu_u64();
    // one period of the fastest free oscillation
    let fastest = data
        .iter()
        .map(|&(j, _)| {
            let eta = 2.0 * PI * (j as f64 + flow.alpha * ratio.round());
            flow.lambda * eta * eta
        })
        .fold(1.0, f64::max);
    let t_max = t_max.unwrap_or(2.0 * PI / fastest);
    let hx = mu as f64 / grid as f64;
    let ht = t_max / (grid - 1) as f64;

    let mut residual: f64 = 0.0;
    let mut v_residual: f64 = 0.0;
    let mut periodicity: f64 = 0.0;
    let mut w = vec![Complex64::default(); grid * grid];
    for it in 0..grid {
        let t = it as f64 * ht;
        for ix in 0..grid {
            let x = ix as f64 * hx;
            residual = residual.max(flow.residual(x, t).norm());
            v_residual = v_residual.max(flow.v_residual(x, t).norm());
            let here = flow.w(x, t);
            periodicity = periodicity.max((flow.w(x + mu as f64, t) - here).norm());
            w[it * grid + ix] = here;
        }
    }
    // centered differences: periodic in x, interior in t
    let mut residual_fd: f64 = 0.0;
    for it in 1..grid - 1 {
        for ix in 0..grid {
            let at = |i: usize, j: usize| w[i * grid + j];
            let (l, r) = ((ix + grid - 1) % grid, (ix + 1) % grid);
            let wt = (at(it + 1, ix) - at(it - 1, ix)) / (2.0 * ht);
            let wxx = (at(it, l) - at(it, ix) * 2.0 + at(it, r)) / (hx * hx);
            residual_fd = residual_fd.max((Complex64::i() * wt + wxx * flow.lambda).norm());
        }
    }
    Ok(ConjugatedFlowReport {
        residual,
        residual_fd,
        periodicity_defect: periodicity,
        v_residual,
        mu,
        grid,
        t_max,
    })
}

/// Observed order of the finite-difference residual between grids `n` and `2n`.
pub fn fd_order(torus: &TwistedTorus, k: f64, data: &[Mode1d], n: usize, t_max: f64) -> Result<f64> {
    let a = verify_conjugated_flow(torus, k, data, n, Some(t_max))?.residual_fd;
    let b = verify_conjugated_flow(torus, k, data, 2 * n, Some(t_max))?.residual_fd;
    Ok((a / b).log2())
}

/// Exact `psi_A` check: `4 pi^2 psi_A(n) = lambda_n` for `|n_i| <= r`.
pub fn psi_consistent(torus: &TwistedTorus, r: i64) -> bool {
    let c = conjugation_constants(torus);
    let four = q(4, 1);
    (-r..=r).all(|a| (-r..=r).all(|b| &four * c.psi_at([a, b]) == ell(torus, [a, b])))
}

/// `alpha` is rational by construction; this re-derives it from the Gram
/// form (`alpha = -Q12 / Q11`) as an independent check.
pub fn alpha_from_gram(torus: &TwistedTorus) -> BigRational {
    let g = torus.gram();
    -(&g[0][1] / &g[0][0])
}
