//! Complex elementary functions that keep relative precision near 0 and 1.

use num_complex::Complex;

use crate::Real;

/// `z^p` for a non-negative integer power, by repeated squaring.
pub(crate) fn powu<F: Real>(z: Complex<F>, p: usize) -> Complex<F> {
    if p == 0 {
        return Complex::new(F::one(), F::zero());
    }
    match u32::try_from(p) {
        Ok(e) => z.powu(e),
        Err(_) => (z.ln() * F::from_usize_lossy(p)).exp(),
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
pub(crate) fn expm1<F: Real>(z: Complex<F>) -> Complex<F> {
    let (s, c) = z.im.sin_cos();
    let half_sin = (z.im * F::half()).sin();
    let em1 = z.re.exp_m1();
    // e^x cos y - 1 = expm1(x) cos y - 2 sin^2(y/2)
    let re = em1 * c - F::two() * half_sin * half_sin;
    let im = z.re.exp() * s;
    Complex::new(re, im)
}

/// Principal `ln(1 + u)` without cancellation for small `|u|`.
pub(crate) fn ln1p<F: Real>(u: Complex<F>) -> Complex<F> {
    let t = F::two() * u.re + u.re * u.re + u.im * u.im;
    let re = if t > -F::one() {
        F::half() * t.ln_1p()
    } else {
        (Complex::new(F::one() + u.re, u.im)).norm().ln()
    };
    let im = u.im.atan2(F::one() + u.re);
    Complex::new(re, im)
}
