//! Finite Fourier series on a twisted torus.
//!
//! Amplitudes are taken against the orthonormal basis
//! `e_n(x) = det(A)^{-1/2} exp(2 pi i m . x)` with `m = A^{-T} n`. In lattice
//! coordinates `x = A s` this is `exp(2 pi i n . s)`, so sampling on the
//! periodic grid `s = (j + 1/2, k + 1/2) / M` is a plain 2-D DFT and the grid
//! mean integrates any trigonometric polynomial with `|n_i| < M` exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Index, TwistedTorus};
use crate::quadrature::{pairwise_sum, pairwise_sum_complex};

#[derive(Clone, Debug)]
pub struct SpectralField {
    torus: Arc<TwistedTorus>,
    amps: BTreeMap<Index, Complex64>,
}

impl SpectralField {
    pub fn zero(torus: Arc<TwistedTorus>) -> Self {
        Self {
            torus,
            amps: BTreeMap::new(),
        }
    }

    pub fn from_amps(torus: Arc<TwistedTorus>, amps: impl IntoIterator<Item = (Index, Complex64)>) -> Self {
        let mut f = Self::zero(torus);
        for (n, a) in amps {
            f.add(n, a);
        }
        f
    }

    pub fn single(torus: Arc<TwistedTorus>, n: Index, a: Complex64) -> Self {
        Self::from_amps(torus, [(n, a)])
    }

    /// Gaussian amplitudes on `support`, normalized to unit L2 norm.
    pub fn random_on(torus: Arc<TwistedTorus>, support: &[Index], rng: &mut impl Rng) -> Self {
        let mut amps: Vec<(Index, Complex64)> = support
            .iter()
            .map(|&n| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                (n, Complex64::new(re, im))
            })
            .collect();
        let norm = amps.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, a) in &mut amps {
                *a /= norm;
            }
        }
        Self::from_amps(torus, amps)
    }

    pub fn torus(&self) -> &TwistedTorus {
        &self.torus
    }

    pub fn torus_arc(&self) -> &Arc<TwistedTorus> {
        &self.torus
    }

    pub fn amps(&self) -> &BTreeMap<Index, Complex64> {
        &self.amps
    }

    pub fn amp(&self, n: Index) -> Complex64 {
        self.amps.get(&n).copied().unwrap_or_default()
    }

    pub fn add(&mut self, n: Index, a: Complex64) {
        *self.amps.entry(n).or_default() += a;
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Fails unless both fields live on the same torus.
    pub fn check_same_torus(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.torus, &other.torus) || self.torus.matrix() == other.torus.matrix() {
            Ok(())
        } else {
            Err(Error::TorusMismatch)
        }
    }

    /// `||u||^2 = sum |a_n|^2`.
    pub fn norm_sq(&self) -> f64 {
        let v: Vec<f64> = self.amps.values().map(|a| a.norm_sqr()).collect();
        pairwise_sum(&v)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Largest `|n_1|` or `|n_2|` in the support.
    pub fn max_abs_index(&self) -> i64 {
        self.amps
            .keys()
            .map(|n| n[0].abs().max(n[1].abs()))
            .max()
            .unwrap_or(0)
    }

    /// Distinct levels in the support, ascending.
    pub fn levels(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.amps.keys().map(|&n| self.torus.level(n)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The level of a single-shell field.
    pub fn single_level(&self) -> Result<u64> {
        let levels = self.levels();
        match levels.as_slice() {
            [] => Ok(0),
            [l] => Ok(*l),
            [a, b, ..] => Err(Error::MixedShells(*a, *b)),
        }
    }

    /// Projection onto one shell.
    pub fn shell_projection(&self, level: u64) -> Self {
        Self {
            torus: self.torus.clone(),
            amps: self
                .amps
                .iter()
                .filter(|(&n, _)| self.torus.level(n) == level)
                .map(|(&n, &a)| (n, a))
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            torus: self.torus.clone(),
            amps: self.amps.iter().map(|(&n, &a)| (n, a * c)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_same_torus(other)?;
        let mut out = self.clone();
        for (&n, &a) in &other.amps {
            out.add(n, a);
        }
        Ok(out)
    }

    /// Largest amplitude difference against `other`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<Index> = self.amps.keys().chain(other.amps.keys()).copied().collect();
        keys.into_iter()
            .map(|n| (self.amp(n) - other.amp(n)).norm())
            .fold(0.0, f64::max)
    }

    /// Value at a Cartesian point.
    pub fn eval(&self, x: [f64; 2]) -> Complex64 {
        let s = 1.0 / self.torus.det_f64().sqrt();
        self.amps
            .iter()
            .map(|(&n, &a)| a * Complex64::from_polar(s, self.torus.phase(n, x)))
            .sum()
    }

    /// Value at lattice coordinates `s` (`x = A s`).
    pub fn eval_lattice(&self, s: [f64; 2]) -> Complex64 {
        let r = 1.0 / self.torus.det_f64().sqrt();
        self.amps
            .iter()
            .map(|(&n, &a)| {
                let ph = 2.0 * PI * ((n[0] as f64) * s[0] + (n[1] as f64) * s[1]);
                a * Complex64::from_polar(r, ph)
            })
            .sum()
    }

    /// Values on the `m x m` periodic grid, row-major with the first lattice
    /// coordinate as the row index.
    pub fn grid_values(&self, m: usize) -> Vec<Complex64> {
        let r = 1.0 / self.torus.det_f64().sqrt();
        // separable: first sum over n2 for each n1, then over n1
        let mut rows: BTreeMap<i64, Vec<(i64, Complex64)>> = BTreeMap::new();
        for (&n, &a) in &self.amps {
            rows.entry(n[0]).or_default().push((n[1], a * r));
        }
        let phase = |n: i64, j: usize| {
            let t = (n as f64) * (j as f64 + 0.5) / m as f64;
            Complex64::from_polar(1.0, 2.0 * PI * (t - t.floor()))
        };
        let partial: Vec<(i64, Vec<Complex64>)> = rows
            .into_iter()
            .map(|(n1, terms)| {
                let col = (0..m)
                    .map(|k| terms.iter().map(|&(n2, a)| a * phase(n2, k)).sum())
                    .collect();
                (n1, col)
            })
            .collect();
        let mut out = vec![Complex64::default(); m * m];
        for j in 0..m {
            for (n1, col) in &partial {
                let w = phase(*n1, j);
                for k in 0..m {
                    out[j * m + k] += w * col[k];
                }
            }
        }
        out
    }

    /// Smallest grid size that integrates `|u|^p` (even `p`) exactly.
    pub fn grid_size_for_power(&self, p: u32) -> usize {
        (p as usize * self.max_abs_index() as usize + 1).max(4)
    }

    /// `int |u|^p` over the torus by the exact periodic grid rule (`p` even).
    pub fn lp_norm_pow(&self, p: u32) -> f64 {
        let m = self.grid_size_for_power(p);
        let vals: Vec<f64> = self.grid_values(m).iter().map(|v| v.norm().powi(p as i32)).collect();
        self.torus.det_f64() * pairwise_sum(&vals) / (m * m) as f64
    }

    /// `<self, other>` in L2 (exact, coefficient side).
    pub fn inner(&self, other: &Self) -> Complex64 {
        let v: Vec<Complex64> = self
            .amps
            .iter()
            .map(|(&n, &a)| a * other.amp(n).conj())
            .collect();
        pairwise_sum_complex(&v)
    }

    pub fn to_record(&self) -> FieldRecord {
        FieldRecord {
            torus: self.torus.name().to_string(),
            amps: self
                .amps
                .iter()
                .map(|(&n, a)| Amplitude { n, re: a.re, im: a.im })
                .collect(),
        }
    }
}

/// Grid mean times the torus area, for samples from [`SpectralField::grid_values`].
pub fn grid_integral(torus: &TwistedTorus, values: &[f64]) -> f64 {
    torus.det_f64() * pairwise_sum(values) / values.len() as f64
}

/// Lattice coordinates of the periodic grid nodes, in `grid_values` order.
pub fn grid_nodes(m: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            out.push([(j as f64 + 0.5) / m as f64, (k as f64 + 0.5) / m as f64]);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub n: Index,
    pub re: f64,
    pub im: f64,
}

/// Serializable view of a field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub torus: String,
    pub amps: Vec<Amplitude>,
}
