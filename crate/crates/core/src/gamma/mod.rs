//! The Diophantine gap functional
//!
//! ```text
//! γ(n,k,m) = π²/(2n²) · (m²k/n + 4n‖m(n−k)/(2n)‖²)
//!          = π² (k m² + r²) / (2n³),   r ≡ m(n−k) (mod 2n), −n < r ≤ n
//! ```
//!
//! and its minimum `γ(n,k)` over nonzero `m`. The residue `r` is computed in
//! integer arithmetic, so only the final division is floating point.

mod cf;

pub use cf::{cf_expand, CfApprox, Convergent};

use serde::Serialize;

use crate::chain::ShuffleParams;
use crate::error::{Error, Result};
use crate::Real;

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn norm_dist<F: Real>(x: F) -> F {
    (x - x.round()).abs()
}

/// Representative of `x` modulo 2 in `(-1, 1]`.
pub fn cmod2<F: Real>(x: F) -> F {
    let two = F::two();
    x - two * ((x - F::one()) / two).ceil()
}

/// Centered residue of `m(n−k)` modulo `2n`, in `(−n, n]`.
pub fn centered_residue(params: ShuffleParams, m: i64) -> i64 {
    let n = params.n() as i128;
    let two_n = 2 * n;
    let mut r = (m as i128 * params.short_cycle() as i128).rem_euclid(two_n);
    if r > n {
        r -= two_n;
    }
    r as i64
}

/// One term `γ(n,k,m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaTerm<F> {
    pub m: i64,
    pub r: i64,
    /// `k m² + r²`; the value is `π² · numerator / (2n³)`.
    pub numerator: i128,
    pub value: F,
}

pub fn gamma_term<F: Real>(params: ShuffleParams, m: i64) -> Result<GammaTerm<F>> {
    if m == 0 {
        return Err(Error::Domain("γ(n,k,m) is only defined for m ≠ 0".into()));
    }
    Ok(term_unchecked(params, m))
}

fn term_unchecked<F: Real>(params: ShuffleParams, m: i64) -> GammaTerm<F> {
    let r = centered_residue(params, m);
    let numerator = params.k() as i128 * (m as i128) * (m as i128) + (r as i128) * (r as i128);
    GammaTerm {
        m,
        r,
        numerator,
        value: value_from_numerator(params, numerator),
    }
}

fn value_from_numerator<F: Real>(params: ShuffleParams, numerator: i128) -> F {
    let n = F::from_usize_lossy(params.n());
    F::pi_squared() * F::from_i128_lossy(numerator) / (F::two() * n * n * n)
}

/// γ evaluated literally as `π²/(2n²)(m²k/n + 4n‖m(n−k)/(2n)‖²)` in floating point.
///
/// `m(n−k)` is reduced modulo `2n` before dividing (an exact operation for
/// integers below the mantissa width), so the norm keeps full precision.
pub fn gamma_norm_form<F: Real>(params: ShuffleParams, m: i64) -> F {
    let n = F::from_usize_lossy(params.n());
    let k = F::from_usize_lossy(params.k());
    let mf = F::from_i64(m).expect("m representable");
    let two_n = F::two() * n;
    let prod = mf * F::from_usize_lossy(params.short_cycle());
    let y = (prod % two_n) / two_n;
    let nd = norm_dist(y);
    F::pi_squared() / (F::two() * n * n) * (mf * mf * k / n + F::lit(4.0) * n * nd * nd)
}

/// γ evaluated as `π²/(2n)(k(m/n)² + (m(1−k/n) mod 2)²)` with the centered mod.
pub fn gamma_cmod_form<F: Real>(params: ShuffleParams, m: i64) -> F {
    let n = F::from_usize_lossy(params.n());
    let k = F::from_usize_lossy(params.k());
    let mf = F::from_i64(m).expect("m representable");
    let prod = mf * F::from_usize_lossy(params.short_cycle());
    let t = cmod2((prod % (F::two() * n)) / n);
    let mn = mf / n;
    F::pi_squared() / (F::two() * n) * (k * mn * mn + t * t)
}

/// Minimizer of `γ(n,k,m)` over `1 ≤ m ≤ search_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaMin<F> {
    pub m_star: i64,
    pub r: i64,
    pub numerator: i128,
    pub value: F,
    pub search_bound: i64,
}

impl<F: Real> GammaMin<F> {
    pub fn relaxation(&self) -> F {
        F::one() / self.value
    }
}

/// `max(4, ⌈4 √n k^{-1/4}⌉)`: twice the bound `2√n k^{-1/4}` on the minimizer.
pub fn search_bound(params: ShuffleParams) -> i64 {
    let n = params.n() as f64;
    let k = params.k() as f64;
    let b = (4.0 * n.sqrt() * k.powf(-0.25)).ceil() as i64;
    b.max(4)
}

/// Exhaustive minimization; ties go to the smallest `m`.
pub fn gamma_min<F: Real>(params: ShuffleParams) -> GammaMin<F> {
    let bound = search_bound(params);
    best_of(params, 1..=bound, bound)
}

fn best_of<F: Real>(params: ShuffleParams, candidates: impl IntoIterator<Item = i64>, bound: i64) -> GammaMin<F> {
    let mut best: Option<(i128, i64, i64)> = None;
    for m in candidates {
        let r = centered_residue(params, m);
        let num = params.k() as i128 * (m as i128) * (m as i128) + (r as i128) * (r as i128);
        let better = match best {
            None => true,
            Some((bn, bm, _)) => num < bn || (num == bn && m < bm),
        };
        if better {
            best = Some((num, m, r));
        }
    }
    let (numerator, m_star, r) = best.expect("at least one candidate");
    GammaMin {
        m_star,
        r,
        numerator,
        value: value_from_numerator(params, numerator),
        search_bound: bound,
    }
}

/// Candidate multipliers from the continued fraction of `(n−k)/(2n)`:
/// convergent denominators, their doubles, and 1 and 2, capped at the search bound.
pub fn cf_candidates(params: ShuffleParams) -> Vec<i64> {
    let bound = search_bound(params);
    let cf = cf_expand(params.short_cycle() as u64, 2 * params.n() as u64)
        .expect("(n-k)/(2n) lies in (0, 1/2)");
    let mut c: Vec<i64> = cf
        .denominators()
        .flat_map(|q| [q as i64, 2 * q as i64])
        .chain([1, 2])
        .filter(|&m| m >= 1 && m <= bound)
        .collect();
    c.sort_unstable();
    c.dedup();
    c
}

/// Minimization restricted to [`cf_candidates`]; agrees with [`gamma_min`].
pub fn gamma_min_cf<F: Real>(params: ShuffleParams) -> GammaMin<F> {
    let bound = search_bound(params);
    best_of(params, cf_candidates(params), bound)
}

/// Term for an arbitrary (already validated) `m`, used by the seed builders.
pub(crate) fn term_value<F: Real>(params: ShuffleParams, m: i64) -> F {
    term_unchecked::<F>(params, m).value
}

/// `2π²√k / n²`, an upper bound on `γ(n,k)` for every `k` (Dirichlet's approximation theorem).
pub fn dirichlet_upper_bound<F: Real>(params: ShuffleParams) -> F {
    let n = F::from_usize_lossy(params.n());
    F::two() * F::pi_squared() * F::from_usize_lossy(params.k()).sqrt() / (n * n)
}
