//! Resonant quadruples on a single shell and the exact L4 norm they produce.
//!
//! For `u = sum_{n in S} a_n e_n` supported on one shell,
//! `||u||_4^4 = (1 / det A) sum a_{m1} a_{m2} conj(a_{mb1} a_{mb2})` over
//! quadruples with `m1 + m2 = mb1 + mb2`. Bucketing ordered pairs by their sum
//! lists the quadruples in `O(|S|^2 + output)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::lattice::{FrequencyShell, Index, TwistedTorus};
use crate::quadrature::CompensatedSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Case {
    /// `m1 = mb1` and `m2 = mb2`.
    Parallelogram,
    /// `m1 = -m2` and `mb1 = -mb2`.
    Degenerate1,
    /// `m1 = mb2` and `m2 = mb1`.
    Degenerate2,
}

/// Subset of [`Case`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Classification(u8);

impl Classification {
    fn bit(c: Case) -> u8 {
        match c {
            Case::Parallelogram => 1,
            Case::Degenerate1 => 2,
            Case::Degenerate2 => 4,
        }
    }

    pub fn insert(&mut self, c: Case) {
        self.0 |= Self::bit(c);
    }

    pub fn contains(&self, c: Case) -> bool {
        self.0 & Self::bit(c) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn cases(&self) -> Vec<Case> {
        [Case::Parallelogram, Case::Degenerate1, Case::Degenerate2]
            .into_iter()
            .filter(|&c| self.contains(c))
            .collect()
    }
}

fn neg(n: Index) -> Index {
    [-n[0], -n[1]]
}

fn add(a: Index, b: Index) -> Index {
    [a[0] + b[0], a[1] + b[1]]
}

/// The cases satisfied by `(m1, m2, mb1, mb2)`; no checks.
pub fn classify_unchecked(m1: Index, m2: Index, mb1: Index, mb2: Index) -> Classification {
    let mut c = Classification::default();
    if m1 == mb1 && m2 == mb2 {
        c.insert(Case::Parallelogram);
    }
    if m1 == neg(m2) && mb1 == neg(mb2) {
        c.insert(Case::Degenerate1);
    }
    if m1 == mb2 && m2 == mb1 {
        c.insert(Case::Degenerate2);
    }
    c
}

/// Classifies a resonant quadruple of one shell. The result is nonempty for
/// every valid input; an empty set would contradict the parallelogram lemma.
pub fn classify_quadruple(torus: &TwistedTorus, m1: Index, m2: Index, mb1: Index, mb2: Index) -> Result<Classification> {
    let l = torus.level(m1);
    for n in [m2, mb1, mb2] {
        let ln = torus.level(n);
        if ln != l {
            return Err(Error::MixedShells(l, ln));
        }
    }
    let s = [m1[0] - mb1[0] + m2[0] - mb2[0], m1[1] - mb1[1] + m2[1] - mb2[1]];
    if s != [0, 0] {
        return Err(Error::NotResonant(s[0], s[1]));
    }
    Ok(classify_unchecked(m1, m2, mb1, mb2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ResonantQuadruple {
    pub m1: Index,
    pub m2: Index,
    pub mbar1: Index,
    pub mbar2: Index,
    #[serde(skip)]
    pub classification: Classification,
}

/// Ordered pairs `(i, j)` of positions in `points`, grouped by
/// `points[i] + points[j]`, in key order.
fn sum_buckets(points: &[Index]) -> Vec<Vec<(usize, usize)>> {
    let mut map: BTreeMap<Index, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, &a) in points.iter().enumerate() {
        for (j, &b) in points.iter().enumerate() {
            map.entry(add(a, b)).or_default().push((i, j));
        }
    }
    map.into_values().collect()
}

fn check_shell(shell: &FrequencyShell) -> Result<()> {
    if shell.level == 0 {
        Err(Error::ZeroLevel)
    } else {
        Ok(())
    }
}

/// All resonant quadruples of a shell (sum bucketing), in canonical order:
/// bucket key, then `(m1, m2)`, then `(mb1, mb2)` by position in the shell.
pub fn enumerate_resonances(shell: &FrequencyShell) -> Result<Vec<ResonantQuadruple>> {
    check_shell(shell)?;
    let pts = &shell.points;
    let buckets = sum_buckets(pts);
    let per_bucket: Vec<Vec<ResonantQuadruple>> = buckets
        .par_iter()
        .map(|b| {
            let mut out = Vec::with_capacity(b.len() * b.len());
            for &(i, j) in b {
                for &(k, l) in b {
                    let (m1, m2, mb1, mb2) = (pts[i], pts[j], pts[k], pts[l]);
                    out.push(ResonantQuadruple {
                        m1,
                        m2,
                        mbar1: mb1,
                        mbar2: mb2,
                        classification: classify_unchecked(m1, m2, mb1, mb2),
                    });
                }
            }
            out
        })
        .collect();
    Ok(per_bucket.into_iter().flatten().collect())
}

/// Number of resonant quadruples, `sum |bucket|^2`, without listing them.
pub fn count_resonances(shell: &FrequencyShell) -> Result<u64> {
    check_shell(shell)?;
    Ok(sum_buckets(&shell.points)
        .iter()
        .map(|b| (b.len() * b.len()) as u64)
        .sum())
}

/// `3 |S|^2 - 3 |S|`.
pub fn closed_form_count(shell_size: u64) -> u64 {
    3 * shell_size * shell_size - 3 * shell_size
}

/// Four nested loops over the shell; the reference for small shells.
pub fn brute_force_resonances(shell: &FrequencyShell) -> Vec<ResonantQuadruple> {
    let pts = &shell.points;
    let mut out = Vec::new();
    for &m1 in pts {
        for &m2 in pts {
            for &mb1 in pts {
                for &mb2 in pts {
                    if add(m1, m2) == add(mb1, mb2) {
                        out.push(ResonantQuadruple {
                            m1,
                            m2,
                            mbar1: mb1,
                            mbar2: mb2,
                            classification: classify_unchecked(m1, m2, mb1, mb2),
                        });
                    }
                }
            }
        }
    }
    out
}

/// `||u||_4^4` from the resonance sum. `u` must live on a single shell.
pub fn l4_fourth_power(field: &SpectralField) -> Result<f64> {
    let level = field.single_level()?;
    let points: Vec<Index> = field.amps().keys().copied().collect();
    if points.is_empty() {
        return Ok(0.0);
    }
    let amps: Vec<Complex64> = points.iter().map(|&n| field.amp(n)).collect();
    let buckets = sum_buckets(&points);
    let partial: Vec<(f64, f64)> = buckets
        .par_iter()
        .map(|b| {
            let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
            for &(i, j) in b {
                let left = amps[i] * amps[j];
                for &(k, l) in b {
                    let t = left * (amps[k] * amps[l]).conj();
                    re.add(t.re);
                    im.add(t.im);
                }
            }
            (re.value(), im.value())
        })
        .collect();
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for (r, i) in partial {
        re.add(r);
        im.add(i);
    }
    let (re, im) = (re.value(), im.value());
    assert!(
        im.abs() <= 1e-12 * re.abs().max(1e-300),
        "resonance sum on level {level} is not real: {re} + {im}i"
    );
    Ok(re / field.torus().det_f64())
}

/// Equal amplitudes `|S|^{-1/2}` on the whole shell of a unimodular torus:
/// the fourth power is exactly `count / |S|^2`.
pub fn equal_amplitude_fourth_power(shell: &FrequencyShell) -> Result<BigRational> {
    let count = count_resonances(shell)?;
    let s = shell.len() as u64;
    Ok(BigRational::new(BigInt::from(count), BigInt::from(s * s)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZygmundCheck {
    pub lhs: f64,
    pub bound: f64,
    /// `bound - lhs`.
    pub slack: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// `||u||_4^4` against `(3 / det A) ||u||_2^4` for a single-shell field.
pub fn zygmund_check(field: &SpectralField) -> Result<ZygmundCheck> {
    let lhs = l4_fourth_power(field)?;
    let n2 = field.norm_sq();
    let bound = 3.0 / field.torus().det_f64() * n2 * n2;
    Ok(ZygmundCheck {
        lhs,
        bound,
        slack: bound - lhs,
        ratio: if bound > 0.0 { lhs / bound } else { 0.0 },
        holds: lhs <= bound * (1.0 + 1e-12),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub n: u32,
    pub level: u64,
    pub shell_size: u64,
    /// Exact value, as `p/q`.
    pub fourth_power: String,
    pub fourth_power_f64: f64,
    /// `3 - 3 / (4 (n + 1))`, as `p/q`.
    pub closed_form: String,
    pub quadruple_count: u64,
    pub closed_form_count: u64,
    pub brute_count: Option<u64>,
    /// Every assertion of the row holds.
    pub verified: bool,
}

/// Level `5^n` of the square torus with equal amplitudes.
pub fn sharpness_row(n: u32, brute_force: bool) -> SharpnessRow {
    let torus = TwistedTorus::identity();
    let level = 5u64.pow(n);
    let shell = torus.shell(level);
    let size = shell.len() as u64;
    let count = count_resonances(&shell).expect("level > 0");
    let exact = equal_amplitude_fourth_power(&shell).expect("level > 0");
    let k = BigInt::from(4 * (n as u64 + 1));
    let closed = BigRational::from_integer(3.into()) - BigRational::new(3.into(), k);
    let brute = brute_force.then(|| brute_force_resonances(&shell).len() as u64);
    let verified = size == 4 * (n as u64 + 1)
        && exact == closed
        && count == closed_form_count(size)
        && brute.is_none_or(|b| b == count);
    SharpnessRow {
        n,
        level,
        shell_size: size,
        fourth_power: exact.to_string(),
        fourth_power_f64: crate::scalar::SurdRational::rational(exact).to_f64(),
        closed_form: closed.to_string(),
        quadruple_count: count,
        closed_form_count: closed_form_count(size),
        brute_count: brute,
        verified,
    }
}

pub fn sharpness_sequence(max_n: u32, brute_force_max: Option<u32>) -> Vec<SharpnessRow> {
    (0..=max_n)
        .map(|n| sharpness_row(n, brute_force_max.is_some_and(|b| n <= b)))
        .collect()
}

/// Exhaustiveness of the parallelogram lemma over all shells of a torus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub shells: u64,
    pub quadruples: u64,
    /// Quadruples with an empty classification.
    pub unclassified: u64,
    /// Shells whose count differs from `3 |S|^2 - 3 |S|`.
    pub count_mismatches: u64,
}

pub fn lemma_exhaustiveness(torus: &TwistedTorus, max_level: u64) -> LemmaReport {
    let shells: Vec<FrequencyShell> = torus
        .enumerate_levels(max_level)
        .into_iter()
        .filter(|s| s.level > 0 && !s.is_empty())
        .collect();
    shells
        .par_iter()
        .map(|s| {
            let q = enumerate_resonances(s).expect("level > 0");
            LemmaReport {
                shells: 1,
                quadruples: q.len() as u64,
                unclassified: q.iter().filter(|x| x.classification.is_empty()).count() as u64,
                count_mismatches: u64::from(q.len() as u64 != closed_form_count(s.len() as u64)),
            }
        })
        .reduce(LemmaReport::default, |a, b| LemmaReport {
            shells: a.shells + b.shells,
            quadruples: a.quadruples + b.quadruples,
            unclassified: a.unclassified + b.unclassified,
            count_mismatches: a.count_mismatches + b.count_mismatches,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn classification_examples() {
        let t = TwistedTorus::identity();
        let c = classify_quadruple(&t, [1, 0], [0, 1], [1, 0], [0, 1]).unwrap();
        assert_eq!(c.cases(), vec![Case::Parallelogram]);
        let c = classify_quadruple(&t, [1, 0], [-1, 0], [0, 1], [0, -1]).unwrap();
        assert_eq!(c.cases(), vec![Case::Degenerate1]);
        let c = classify_quadruple(&t, [1, 0], [0, 1], [0, 1], [1, 0]).unwrap();
        assert_eq!(c.cases(), vec![Case::Degenerate2]);
        assert_eq!(
            classify_quadruple(&t, [1, 0], [1, 1], [1, 0], [1, 1]),
            Err(Error::MixedShells(1, 2))
        );
        assert_eq!(
            classify_quadruple(&t, [1, 0], [1, 0], [0, 1], [0, 1]),
            Err(Error::NotResonant(2, -2))
        );
    }

    #[test]
    fn counts_match_brute_force() {
        for (t, level, want) in [
            (TwistedTorus::identity(), 1, 36),
            (TwistedTorus::identity(), 5, 168),
            (TwistedTorus::hexagonal(), 1, 90),
        ] {
            let sh = t.shell(level);
            let mut fast = enumerate_resonances(&sh).unwrap();
            let mut slow = brute_force_resonances(&sh);
            assert_eq!(fast.len(), want);
            fast.sort();
            slow.sort();
            assert_eq!(fast, slow);
        }
        assert_eq!(enumerate_resonances(&TwistedTorus::identity().shell(0)), Err(Error::ZeroLevel));
    }

    #[test]
    fn sharpness_first_rows() {
        let r = sharpness_row(1, true);
        assert_eq!((r.level, r.shell_size, r.fourth_power.as_str()), (5, 8, "21/8"));
        let r = sharpness_row(0, true);
        assert_eq!((r.level, r.shell_size, r.fourth_power.as_str(), r.brute_count), (1, 4, "9/4", Some(36)));
        let r = sharpness_row(4, false);
        assert_eq!((r.level, r.shell_size, r.fourth_power_f64), (625, 20, 2.85));
        assert!(r.verified);
    }

    #[test]
    fn single_frequency() {
        let t = Arc::new(TwistedTorus::hexagonal());
        let f = SpectralField::single(t.clone(), [2, 1], Complex64::new(0.6, -0.8));
        let det = t.det_f64();
        assert!((l4_fourth_power(&f).unwrap() - 1.0 / det).abs() < 1e-15);
        let z = zygmund_check(&f).unwrap();
        assert!((z.bound - 3.0 / det).abs() < 1e-15 && z.holds);
    }
}
