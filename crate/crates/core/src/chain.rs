//! The Markov chain followed by a single card.
//!
//! Positions are 1-indexed. A card in position `i ≤ n-k-1` moves to `i+1`;
//! the card in position `n-k` moves to `1` or `n-k+1`; a card in
//! `n-k < i < n` stays or moves to `i+1`; the bottom card moves to `1` or
//! stays. Every branch has probability one half, so the transition matrix is
//! the average of two permutation matrices and is doubly stochastic.
//!
//! The matrix convention is row-stochastic: `P[i][j] = Pr(i → j)` and
//! distributions are row vectors.

use num_complex::Complex;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::cmath::powu;
use crate::error::{Error, Result};
use crate::Real;

/// Deck size `n` and shift `k` of one overlapping-cycles shuffle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShuffleParams {
    n: usize,
    k: usize,
}

impl ShuffleParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("deck size n = {n} must be at least 2")));
        }
        if k == 0 || k >= n {
            return Err(Error::InvalidParams(format!(
                "shift k = {k} must satisfy 1 <= k <= n-1 = {}",
                n - 1
            )));
        }
        Ok(Self { n, k })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Length `n - k` of the shorter cycle.
    #[inline]
    pub fn short_cycle(&self) -> usize {
        self.n - self.k
    }

    fn check_position(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            Err(Error::Domain(format!("position {i} outside 1..={}", self.n)))
        } else {
            Ok(())
        }
    }

    /// Position of a card after one move, given which card was taken to the top.
    ///
    /// `bottom = true` moves the `n`th card, otherwise the `(n-k)`th card.
    #[inline]
    pub fn apply_move(&self, i: usize, bottom: bool) -> usize {
        let cut = if bottom { self.n } else { self.n - self.k };
        if i < cut {
            i + 1
        } else if i == cut {
            1
        } else {
            i
        }
    }
}

/// Law of the card's position after one shuffle from position `i`, as
/// `(position, probability)` pairs sorted by position.
pub fn transition_distribution<T>(params: ShuffleParams, i: usize) -> Result<Vec<(usize, T)>>
where
    T: Num + Clone,
{
    params.check_position(i)?;
    let half = T::one() / (T::one() + T::one());
    let n = params.n;
    let cut = params.short_cycle();
    let out = if i < cut {
        vec![(i + 1, T::one())]
    } else if i == cut {
        vec![(1, half.clone()), (cut + 1, half)]
    } else if i < n {
        vec![(i, half.clone()), (i + 1, half)]
    } else {
        vec![(1, half.clone()), (n, half)]
    };
    Ok(out)
}

/// Dense `n × n` transition matrix, 0-indexed storage of 1-indexed positions.
///
/// Generic over the entry type so it can be built over exact rationals.
pub fn build_matrix<T>(params: ShuffleParams) -> Vec<Vec<T>>
where
    T: Num + Clone,
{
    let n = params.n;
    let mut m = vec![vec![T::zero(); n]; n];
    for i in 1..=n {
        for (j, p) in transition_distribution::<T>(params, i).expect("position in range") {
            let cell = &mut m[i - 1][j - 1];
            *cell = cell.clone() + p;
        }
    }
    m
}

/// Probability vector over positions `1..=n` (stored 0-indexed).
#[derive(Debug, Clone, PartialEq)]
pub struct DistVector<F> {
    probs: Vec<F>,
}

impl<F: Real> DistVector<F> {
    pub fn new(probs: Vec<F>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("empty distribution".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= F::zero())) {
            return Err(Error::Domain(format!("negative or NaN mass {p} at position {}", i + 1)));
        }
        let total = probs.iter().fold(F::zero(), |acc, &p| acc + p);
        if (total - F::one()).abs() > F::mass_tol() {
            return Err(Error::Domain(format!("total mass {total} differs from 1")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![F::one() / F::from_usize_lossy(n); n],
        }
    }

    pub fn point_mass(n: usize, position: usize) -> Result<Self> {
        if position == 0 || position > n {
            return Err(Error::Domain(format!("position {position} outside 1..={n}")));
        }
        let mut probs = vec![F::zero(); n];
        probs[position - 1] = F::one();
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of 1-indexed `position`.
    pub fn get(&self, position: usize) -> F {
        self.probs[position - 1]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.probs
    }

    /// Total-variation distance to the uniform law.
    pub fn tv_to_uniform(&self) -> F {
        let u = F::one() / F::from_usize_lossy(self.probs.len());
        let s = self.probs.iter().fold(F::zero(), |acc, &p| acc + (p - u).abs());
        s * F::half()
    }
}

/// One sparse step `dst = src · P`. Both slices have length `n`.
pub fn step_into<F: Real>(params: ShuffleParams, src: &[F], dst: &mut [F]) {
    let n = params.n;
    let cut = params.short_cycle();
    let half = F::half();
    debug_assert_eq!(src.len(), n);
    debug_assert_eq!(dst.len(), n);

    // deterministic shift for positions 1..cut-1
    dst[0] = F::zero();
    dst[1..cut].copy_from_slice(&src[0..cut - 1]);
    dst[cut..].iter_mut().for_each(|x| *x = F::zero());

    let at_cut = src[cut - 1] * half;
    dst[0] = dst[0] + at_cut;
    dst[cut] = dst[cut] + at_cut;
    for i in cut + 1..n {
        let h = src[i - 1] * half;
        dst[i - 1] = dst[i - 1] + h;
        dst[i] = dst[i] + h;
    }
    let h = src[n - 1] * half;
    dst[0] = dst[0] + h;
    dst[n - 1] = dst[n - 1] + h;
}

/// The law after `t` shuffles, `d · P^t`, using the O(n) sparse update.
pub fn evolve<F: Real>(params: ShuffleParams, d: &DistVector<F>, t: usize) -> Result<DistVector<F>> {
    if d.len() != params.n {
        return Err(Error::Domain(format!(
            "distribution has {} entries, deck has {}",
            d.len(),
            params.n
        )));
    }
    let mut cur = d.probs.clone();
    let mut next = vec![F::zero(); params.n];
    for _ in 0..t {
        step_into(params, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(DistVector { probs: cur })
}

/// `g(λ) = (2λ^{n-k} - 1)(2λ - 1)^k - 1`, which is `2^{k+1}` times the
/// characteristic polynomial of the chain.
pub fn char_fn<F: Real>(params: ShuffleParams, lambda: Complex<F>) -> Complex<F> {
    let one = Complex::new(F::one(), F::zero());
    let a = powu(lambda, params.short_cycle()) * F::two() - one;
    let b = powu(lambda * F::two() - one, params.k);
    a * b - one
}

/// `g'(λ) = 2(n-k)λ^{n-k-1}(2λ-1)^k + 2k(2λ^{n-k}-1)(2λ-1)^{k-1}`.
pub fn char_fn_deriv<F: Real>(params: ShuffleParams, lambda: Complex<F>) -> Complex<F> {
    let one = Complex::new(F::one(), F::zero());
    let s = params.short_cycle();
    let k = params.k;
    let lin = lambda * F::two() - one;
    let lin_km1 = powu(lin, k - 1);
    let lin_k = lin_km1 * lin;
    let first = powu(lambda, s - 1) * lin_k * (F::two() * F::from_usize_lossy(s));
    let second = (powu(lambda, s) * F::two() - one) * lin_km1 * (F::two() * F::from_usize_lossy(k));
    first + second
}

/// Exact trace of the transition matrix: one half per self-loop.
pub fn trace<T: Num + Clone>(params: ShuffleParams) -> T {
    let m = build_matrix::<T>(params);
    (0..params.n).fold(T::zero(), |acc, i| acc + m[i][i].clone())
}
