use num_complex::Complex;

use super::{PolarEigen, Seed};
use crate::chain::{char_fn, char_fn_deriv, ShuffleParams};
use crate::cmath::{expm1, ln1p, powu};
use crate::error::{Error, Result};
use crate::Real;

pub const MAX_NEWTON_ITERATIONS: usize = 50;

/// `g'(λ)/g(λ)` without overflow for large `k`.
///
/// With `A = 2λ^{n-k} - 1`, `B = (2λ-1)^k` and `D = 2(n-k)λ^{n-k-1} + 2kA/(2λ-1)`
/// we have `g = AB - 1` and `g' = BD`. Whichever of `B`, `1/B` is bounded is
/// the one that gets materialized.
pub(crate) fn log_derivative<F: Real>(params: ShuffleParams, lambda: Complex<F>) -> Complex<F> {
    let (ld, _) = log_derivative_and_scale(params, lambda);
    ld
}

/// Returns `g'/g` together with `ln|g'|`.
fn log_derivative_and_scale<F: Real>(params: ShuffleParams, lambda: Complex<F>) -> (Complex<F>, F) {
    let one = Complex::new(F::one(), F::zero());
    let s = params.short_cycle();
    let k = params.k();
    let lin = lambda * F::two() - one;
    if lin.norm_sqr() == F::zero() {
        let g = char_fn(params, lambda);
        let d = char_fn_deriv(params, lambda);
        return (d / g, d.norm().ln());
    }
    let a = powu(lambda, s) * F::two() - one;
    let d = powu(lambda, s - 1) * F::from_usize_lossy(2 * s) + a * F::from_usize_lossy(2 * k) / lin;
    let ln_b = lin.ln() * F::from_usize_lossy(k);
    let ln_abs_deriv = ln_b.re + d.norm().ln();
    let (num, den) = if ln_b.re >= F::zero() {
        (d, a - (-ln_b).exp())
    } else {
        let b = ln_b.exp();
        (b * d, a * b - one)
    };
    // an exact root: report an infinite log-derivative rather than NaN
    let ld = if den.norm_sqr() == F::zero() {
        Complex::new(F::infinity(), F::zero())
    } else {
        num / den
    };
    // far outside the unit disk the powers overflow, but there g ≈ 2^{k+1}λ^n
    let ld = if !(ld.re.is_finite() && ld.im.is_finite()) && lambda.norm() > F::two() {
        lambda.inv() * F::from_usize_lossy(params.n())
    } else {
        ld
    };
    (ld, ln_abs_deriv)
}

/// Newton step `h/h'` for `h(w) = g(e^w)`, evaluated so that precision is
/// kept when `e^w` is close to 1.
fn log_coordinate_step<F: Real>(params: ShuffleParams, w: Complex<F>) -> (Complex<F>, F) {
    let s = F::from_usize_lossy(params.short_cycle());
    let k = F::from_usize_lossy(params.k());
    let two = F::two();
    // 2λ^{n-k} - 1 = 1 + u1,  2λ - 1 = 1 + u2
    let u1 = expm1(w * s) * two;
    let u2 = expm1(w) * two;
    let big_l = ln1p(u1) + ln1p(u2) * k;
    let h = expm1(big_l);
    let two_c = Complex::new(two, F::zero());
    let one = Complex::new(F::one(), F::zero());
    let dl = (u1 + two_c) / (one + u1) * s + (u2 + two_c) / (one + u2) * k;
    let dh = big_l.exp() * dl;
    (h / dh, dh.norm())
}

/// Refines one seed to a root of `g`.
///
/// Seeds with modulus at least 1/2 are iterated in `w = ln λ` until
/// `|Δw| < newton_tol`, handing over to the `λ` iteration if `|λ|` drops
/// below 1/4. The `λ` iteration stops when `|Δλ| < newton_tol · max(1, |λ|)`.
pub fn newton_refine<F: Real>(params: ShuffleParams, seed: Seed<F>) -> Result<PolarEigen<F>> {
    if seed.lambda.norm() >= F::half() {
        refine_log(params, seed)
    } else {
        refine_cartesian(params, seed)
    }
}

fn failure<F: Real>(seed: Seed<F>, reason: impl Into<String>) -> Error {
    Error::NewtonFailed {
        seed_re: seed.lambda.re.to_f64().unwrap_or(f64::NAN),
        seed_im: seed.lambda.im.to_f64().unwrap_or(f64::NAN),
        reason: reason.into(),
    }
}

fn refine_log<F: Real>(params: ShuffleParams, seed: Seed<F>) -> Result<PolarEigen<F>> {
    let mut w = seed.lambda.ln();
    for it in 0..=MAX_NEWTON_ITERATIONS {
        let (step, deriv) = log_coordinate_step(params, w);
        let modulus = w.re.exp();
        // |h'| = |g'(λ)|·|λ|
        if !(deriv / modulus >= F::tiny_derivative()) {
            return Err(failure(seed, format!("derivative vanished at iteration {it}")));
        }
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(failure(seed, format!("non-finite step at iteration {it}")));
        }
        w = w - step;
        // every eigenvalue of a stochastic matrix has modulus at most 1
        if !(w.re <= F::two().ln()) {
            return Err(failure(seed, format!("iterate left |λ| <= 2 at iteration {it}")));
        }
        // |Δw| is the relative change in λ, which cannot be fooled by |λ| → 0
        if step.norm() < F::newton_tol() {
            let correction = step.norm() * w.re.exp();
            return Ok(PolarEigen::from_log(params, w, correction, seed.family, it));
        }
        if w.re < F::lit(0.25).ln() {
            let handoff = Seed {
                lambda: w.exp(),
                family: seed.family,
            };
            return refine_cartesian(params, handoff).map_err(|_| failure(seed, "diverged after leaving |λ| >= 1/4"));
        }
    }
    Err(failure(seed, format!("no convergence in {MAX_NEWTON_ITERATIONS} iterations")))
}

fn refine_cartesian<F: Real>(params: ShuffleParams, seed: Seed<F>) -> Result<PolarEigen<F>> {
    let mut lambda = seed.lambda;
    let tiny_ln = F::tiny_derivative().ln();
    for it in 0..=MAX_NEWTON_ITERATIONS {
        if lambda.norm_sqr() == F::zero() && char_fn(params, lambda).norm_sqr() == F::zero() {
            return Ok(PolarEigen::from_lambda(params, lambda, F::zero(), seed.family, it));
        }
        let (ld, ln_abs_deriv) = log_derivative_and_scale(params, lambda);
        if !(ln_abs_deriv >= tiny_ln) {
            return Err(failure(seed, format!("derivative vanished at iteration {it}")));
        }
        let step = ld.inv();
        if ld.norm_sqr() == F::zero() || !(step.re.is_finite() && step.im.is_finite()) {
            // g'/g = 0 means g is infinite relative to g'; no usable step
            if ld.re.is_infinite() || ld.im.is_infinite() {
                return Ok(PolarEigen::from_lambda(params, lambda, F::zero(), seed.family, it));
            }
            return Err(failure(seed, format!("non-finite step at iteration {it}")));
        }
        lambda = lambda - step;
        if !(lambda.norm() <= F::two()) {
            return Err(failure(seed, format!("iterate left |λ| <= 2 at iteration {it}")));
        }
        let correction = step.norm();
        if correction < F::newton_tol() * lambda.norm().max(F::one()) {
            return Ok(PolarEigen::from_lambda(params, lambda, correction, seed.family, it));
        }
    }
    Err(failure(seed, format!("no convergence in {MAX_NEWTON_ITERATIONS} iterations")))
}
