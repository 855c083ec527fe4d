//! Eigenvalues of the single-card chain and its spectral gap.
//!
//! Eigenvalues are the roots of `g(λ) = (2λ^{n−k} − 1)(2λ − 1)^k − 1`. Three
//! seed families feed a Newton refinement:
//!
//! * near one: `exp(iπm/n − γ(n,k,m))` for small `|m|`; these determine the gap,
//! * inner circle: `(1 + e^{iπ(2j+1)/k})/2`, the roots of `(2λ−1)^k = −1`,
//! * outer circle: `2^{−1/(n−k)} e^{2πij/(n−k)}`, the roots of `2λ^{n−k} = 1`.
//!
//! A full Aberth–Ehrlich solve serves as the oracle for `n ≤ 512`.

mod aberth;
mod newton;

pub use aberth::{full_spectrum_oracle, ORACLE_MAX_N};
pub use newton::{newton_refine, MAX_NEWTON_ITERATIONS};

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::ShuffleParams;
use crate::error::{Error, Result};
use crate::gamma::{cmod2, search_bound, term_value};
use crate::Real;

/// Where a refined eigenvalue came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeedFamily {
    NearOne(i64),
    OuterCircle(usize),
    InnerCircle(usize),
    Oracle,
}

impl fmt::Display for SeedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedFamily::NearOne(m) => write!(f, "near_one({m})"),
            SeedFamily::OuterCircle(j) => write!(f, "outer_circle({j})"),
            SeedFamily::InnerCircle(j) => write!(f, "inner_circle({j})"),
            SeedFamily::Oracle => f.write_str("oracle"),
        }
    }
}

impl Serialize for SeedFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed<F> {
    pub lambda: Complex<F>,
    pub family: SeedFamily,
}

/// An eigenvalue in polar form `λ = exp(−ε + iπa)`, `λ^{n−k} = exp(−(n−k)ε + iπb)`,
/// with `a, b ∈ (−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarEigen<F> {
    pub lambda: Complex<F>,
    pub eps: F,
    pub a: F,
    pub b: F,
    /// Size of the last Newton (or Aberth) correction.
    pub residual: F,
    pub seed_family: SeedFamily,
    pub iterations: usize,
}

impl<F: Real> PolarEigen<F> {
    /// Builds from `w = ln λ`, keeping `ε = −Re w` at full relative precision.
    pub fn from_log(params: ShuffleParams, w: Complex<F>, residual: F, family: SeedFamily, iterations: usize) -> Self {
        let a = cmod2(w.im / F::PI());
        let b = cmod2(F::from_usize_lossy(params.short_cycle()) * a);
        Self {
            lambda: w.exp(),
            eps: -w.re,
            a,
            b,
            residual,
            seed_family: family,
            iterations,
        }
    }

    pub fn from_lambda(
        params: ShuffleParams,
        lambda: Complex<F>,
        residual: F,
        family: SeedFamily,
        iterations: usize,
    ) -> Self {
        if lambda.norm_sqr() == F::zero() {
            return Self {
                lambda,
                eps: F::infinity(),
                a: F::zero(),
                b: F::zero(),
                residual,
                seed_family: family,
                iterations,
            };
        }
        let mut e = Self::from_log(params, lambda.ln(), residual, family, iterations);
        e.lambda = lambda;
        e
    }

    pub fn modulus(&self) -> F {
        self.lambda.norm()
    }

    /// `1 − |λ|`, computed from `ε` so it stays accurate when `|λ| ≈ 1`.
    pub fn one_minus_modulus(&self) -> F {
        -(-self.eps).exp_m1()
    }

    pub fn conj(&self, family: SeedFamily) -> Self {
        Self {
            lambda: self.lambda.conj(),
            a: cmod2(-self.a),
            b: cmod2(-self.b),
            seed_family: family,
            ..*self
        }
    }

    fn same_root(&self, other: &Self) -> bool {
        let scale = self.lambda.norm().max(F::one());
        (self.lambda - other.lambda).norm() < F::dedup_radius() * scale
    }
}

/// A collection of distinct eigenvalues of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<F> {
    pub eigs: Vec<PolarEigen<F>>,
    pub n_expected: usize,
}

impl<F: Real> Spectrum<F> {
    pub fn len(&self) -> usize {
        self.eigs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigs.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.eigs.len() == self.n_expected
    }

    pub fn sum(&self) -> Complex<F> {
        self.eigs
            .iter()
            .fold(Complex::new(F::zero(), F::zero()), |acc, e| acc + e.lambda)
    }

    /// Entries within `tol` of λ = 1.
    pub fn unit_count(&self, tol: F) -> usize {
        let one = Complex::new(F::one(), F::zero());
        self.eigs.iter().filter(|e| (e.lambda - one).norm() < tol).count()
    }

    pub fn contains(&self, z: Complex<F>, tol: F) -> bool {
        self.eigs.iter().any(|e| (e.lambda - z).norm() < tol)
    }

    /// Sorts by decreasing modulus, then by angle, for stable output.
    pub fn sort(&mut self) {
        self.eigs.sort_by(|x, y| {
            x.eps
                .partial_cmp(&y.eps)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(y.a.partial_cmp(&x.a).unwrap_or(std::cmp::Ordering::Equal))
        });
    }
}

/// `exp(iπm/n − γ(n,k,m))` for `0 < |m| ≤ m_max`, ordered `1, −1, 2, −2, …`.
pub fn seeds_near_one<F: Real>(params: ShuffleParams, m_max: i64) -> Vec<Seed<F>> {
    let mut out = Vec::with_capacity(2 * m_max.max(0) as usize);
    for m in 1..=m_max {
        for mm in [m, -m] {
            out.push(near_one_seed(params, mm));
        }
    }
    out
}

fn near_one_seed<F: Real>(params: ShuffleParams, m: i64) -> Seed<F> {
    if m == 0 {
        return Seed {
            lambda: Complex::new(F::one(), F::zero()),
            family: SeedFamily::NearOne(0),
        };
    }
    let n = F::from_usize_lossy(params.n());
    let phase = F::PI() * F::from_i64(m).expect("m representable") / n;
    let w = Complex::new(-term_value::<F>(params, m), phase);
    Seed {
        lambda: w.exp(),
        family: SeedFamily::NearOne(m),
    }
}

/// Both circle families, before any exclusion near `λ = 1`.
pub fn seeds_circles_all<F: Real>(params: ShuffleParams) -> Vec<Seed<F>> {
    let k = params.k();
    let s = params.short_cycle();
    let kf = F::from_usize_lossy(k);
    let sf = F::from_usize_lossy(s);
    let half = F::half();
    let mut out = Vec::with_capacity(params.n());
    for j in 0..k {
        let theta = F::PI() * F::from_usize_lossy(2 * j + 1) / kf;
        let lambda = (Complex::from_polar(F::one(), theta) + F::one()) * half;
        out.push(Seed {
            lambda,
            family: SeedFamily::InnerCircle(j),
        });
    }
    let radius = F::two().powf(-F::one() / sf);
    for j in 0..s {
        let theta = F::two() * F::PI() * F::from_usize_lossy(j) / sf;
        out.push(Seed {
            lambda: Complex::from_polar(radius, theta),
            family: SeedFamily::OuterCircle(j),
        });
    }
    out
}

/// Circle seeds, minus those within angle `π(m_max + 1/2)/n` of the positive
/// real axis, which the near-one family covers.
pub fn seeds_circles<F: Real>(params: ShuffleParams, m_max: i64) -> Vec<Seed<F>> {
    let cutoff = F::PI() * (F::from_i64(m_max).expect("m_max representable") + F::half())
        / F::from_usize_lossy(params.n());
    seeds_circles_all::<F>(params)
        .into_iter()
        .filter(|s| s.lambda.im.atan2(s.lambda.re).abs() >= cutoff)
        .collect()
}

fn dedup<F: Real>(eigs: Vec<PolarEigen<F>>) -> Vec<PolarEigen<F>> {
    let mut kept: Vec<PolarEigen<F>> = Vec::with_capacity(eigs.len());
    for e in eigs {
        if !kept.iter().any(|k| k.same_root(&e)) {
            kept.push(e);
        }
    }
    kept
}

/// Refines seeds concurrently; returns converged roots and the failure count.
fn refine_all<F: Real>(params: ShuffleParams, seeds: &[Seed<F>]) -> (Vec<PolarEigen<F>>, usize) {
    let results: Vec<Result<PolarEigen<F>>> = seeds.par_iter().map(|&s| newton_refine(params, s)).collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut failed = 0;
    for r in results {
        match r {
            Ok(e) => ok.push(e),
            Err(_) => failed += 1,
        }
    }
    (ok, failed)
}

/// Merges oracle roots not already present, so that a failed seed cannot hide
/// an eigenvalue.
fn merge_oracle<F: Real>(params: ShuffleParams, have: Vec<PolarEigen<F>>) -> Result<Vec<PolarEigen<F>>> {
    let oracle = full_spectrum_oracle::<F>(params)?;
    let mut out = have;
    for o in oracle.eigs {
        if !out.iter().any(|e| e.same_root(&o)) {
            out.push(o);
        }
    }
    Ok(out)
}

/// Spectral gap and the eigenvalue(s) realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct GapResult<F> {
    /// `1 − max{|λ| : λ ≠ 1}`.
    pub gap: F,
    /// `min{ε : λ ≠ 1}`, the log-modulus form of the gap.
    pub eps_gap: F,
    pub witness: PolarEigen<F>,
    /// Every eigenvalue whose modulus is within 1e-12 of the maximum.
    pub witnesses: Vec<PolarEigen<F>>,
    pub m_max: i64,
    pub failed_seeds: usize,
    pub used_oracle: bool,
}

impl<F: Real> GapResult<F> {
    pub fn relaxation(&self) -> F {
        F::one() / self.gap
    }
}

/// Below this size the near-one seeds can miss the dominant eigenvalue, so the
/// oracle is always merged in.
pub const ALWAYS_ORACLE_MAX_N: usize = 32;
const UNIT_TOL: f64 = 1e-10;
const WITNESS_TOL: f64 = 1e-12;

/// Spectral gap from Newton-refined near-one seeds with `m_max` equal to the
/// γ search bound.
///
/// The unit eigenvalue comes from the `m = 0` seed, which is exactly 1, and is
/// required to be the only root within 1e-10 of 1. Seeds with negative `m`
/// are obtained by conjugation. When a seed fails and `n ≤ 512`, or always
/// when `n ≤ 32`, the missing roots are filled in from the full oracle.
pub fn spectral_gap<F: Real>(params: ShuffleParams) -> Result<GapResult<F>> {
    let m_max = search_bound(params);
    let seeds: Vec<Seed<F>> = (0..=m_max).map(|m| near_one_seed(params, m)).collect();
    let (refined, failed) = refine_all(params, &seeds);

    let mut all = Vec::with_capacity(2 * refined.len());
    for e in refined {
        let real = e.lambda.im.abs() <= F::dedup_radius() * e.lambda.norm().max(F::one());
        all.push(e);
        if !real {
            let fam = match e.seed_family {
                SeedFamily::NearOne(m) => SeedFamily::NearOne(-m),
                f => f,
            };
            all.push(e.conj(fam));
        }
    }
    let mut used_oracle = false;
    if (failed > 0 && params.n() <= ORACLE_MAX_N) || params.n() <= ALWAYS_ORACLE_MAX_N {
        all = merge_oracle(params, all)?;
        used_oracle = true;
    }
    let eigs = dedup(all);
    gap_from_roots(params, eigs, m_max, failed, used_oracle)
}

fn gap_from_roots<F: Real>(
    params: ShuffleParams,
    eigs: Vec<PolarEigen<F>>,
    m_max: i64,
    failed_seeds: usize,
    used_oracle: bool,
) -> Result<GapResult<F>> {
    let one = Complex::new(F::one(), F::zero());
    let unit_tol = F::lit(UNIT_TOL);
    let (units, rest): (Vec<_>, Vec<_>) = eigs.into_iter().partition(|e| (e.lambda - one).norm() < unit_tol);
    if units.len() != 1 {
        return Err(Error::Internal(format!(
            "expected exactly one eigenvalue at 1 for (n, k) = ({}, {}), found {}",
            params.n(),
            params.k(),
            units.len()
        )));
    }
    let best = rest
        .iter()
        .map(|e| e.one_minus_modulus())
        .fold(None, |acc: Option<F>, g| Some(acc.map_or(g, |a| a.min(g))))
        .ok_or_else(|| Error::Internal("no non-unit eigenvalue found".into()))?;
    let mut witnesses: Vec<PolarEigen<F>> = rest
        .into_iter()
        .filter(|e| e.one_minus_modulus() <= best + F::lit(WITNESS_TOL))
        .collect();
    witnesses.sort_by(|x, y| {
        let key = |e: &PolarEigen<F>| (e.a < F::zero(), e.a.abs());
        let (xa, xb) = key(x);
        let (ya, yb) = key(y);
        xa.cmp(&ya).then(xb.partial_cmp(&yb).unwrap_or(std::cmp::Ordering::Equal))
    });
    let witness = witnesses[0];
    let eps_gap = witnesses.iter().map(|e| e.eps).fold(F::infinity(), F::min);
    Ok(GapResult {
        gap: best,
        eps_gap,
        witness,
        witnesses,
        m_max,
        failed_seeds,
        used_oracle,
    })
}

/// Spectral gap read off the full oracle spectrum (`n ≤ 512`).
pub fn oracle_gap<F: Real>(params: ShuffleParams) -> Result<GapResult<F>> {
    let s = full_spectrum_oracle::<F>(params)?;
    gap_from_roots(params, s.eigs, 0, 0, true)
}

/// Every eigenvalue reachable from the three seed families.
///
/// For `n ≤ 512` the result is reconciled with the oracle so it holds exactly
/// `n` roots; seeded roots keep their family label and oracle-only roots are
/// labelled `oracle`. For larger `n` the spectrum may be incomplete and
/// `n_expected` records how many roots exist.
pub fn seeded_spectrum<F: Real>(params: ShuffleParams) -> Result<Spectrum<F>> {
    let m_max = search_bound(params);
    let mut seeds: Vec<Seed<F>> = vec![near_one_seed(params, 0)];
    seeds.extend(seeds_near_one(params, m_max));
    seeds.extend(seeds_circles(params, m_max));
    let (refined, _failed) = refine_all(params, &seeds);
    let seeded = dedup(refined);

    let eigs = if params.n() <= ORACLE_MAX_N {
        let oracle = full_spectrum_oracle::<F>(params)?;
        oracle
            .eigs
            .into_iter()
            .map(|o| seeded.iter().find(|e| e.same_root(&o)).copied().unwrap_or(o))
            .collect()
    } else {
        seeded
    };
    let mut s = Spectrum {
        eigs,
        n_expected: params.n(),
    };
    s.sort();
    Ok(s)
}
