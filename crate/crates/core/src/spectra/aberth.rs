use num_complex::Complex;

use super::newton::log_derivative;
use super::{PolarEigen, SeedFamily, Spectrum};
use crate::chain::ShuffleParams;
use crate::error::{Error, Result};
use crate::Real;

/// Largest deck size the simultaneous-iteration oracle accepts.
pub const ORACLE_MAX_N: usize = 512;

const MAX_SWEEPS: usize = 2000;
const INIT_RADIUS: f64 = 0.9;

/// All `n` roots of `g` by Aberth–Ehrlich iteration (Gauss–Seidel sweeps).
///
/// Works on `g'/g` directly, never on expanded coefficients. Starts from `n`
/// equi-spaced points on the circle of radius 0.9, rotated by an irrational
/// fraction of the spacing so no start point sits on the real axis.
pub fn full_spectrum_oracle<F: Real>(params: ShuffleParams) -> Result<Spectrum<F>> {
    let n = params.n();
    if n > ORACLE_MAX_N {
        return Err(Error::Domain(format!(
            "root oracle is limited to n <= {ORACLE_MAX_N}, got n = {n}"
        )));
    }
    let roots = aberth_roots(params)?;
    let eigs = roots
        .into_iter()
        .map(|z| {
            let residual: F = log_derivative(params, z).inv().norm();
            let residual = if residual.is_finite() { residual } else { F::zero() };
            PolarEigen::from_lambda(params, z, residual, SeedFamily::Oracle, 0)
        })
        .collect();
    Ok(Spectrum { eigs, n_expected: n })
}

fn aberth_roots<F: Real>(params: ShuffleParams) -> Result<Vec<Complex<F>>> {
    let n = params.n();
    let spacing = F::two() * F::PI() / F::from_usize_lossy(n);
    let rotation = (F::lit(2.0).sqrt() - F::one()) * spacing * F::half();
    let radius = F::lit(INIT_RADIUS);
    let mut z: Vec<Complex<F>> = (0..n)
        .map(|j| Complex::from_polar(radius, spacing * F::from_usize_lossy(j) + rotation))
        .collect();
    let mut done = vec![false; n];
    let tol = F::newton_tol();

    let mut worst = F::infinity();
    for _sweep in 0..MAX_SWEEPS {
        worst = F::zero();
        for i in 0..n {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let ld = log_derivative(params, zi);
            let mut repulsion = Complex::new(F::zero(), F::zero());
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    repulsion = repulsion + (zi - zj).inv();
                }
            }
            // w = (g/g') / (1 - (g/g') Σ 1/(z_i - z_j)) = 1 / (g'/g - Σ)
            let denom = ld - repulsion;
            let w = if ld.re.is_infinite() || ld.im.is_infinite() {
                Complex::new(F::zero(), F::zero())
            } else {
                denom.inv()
            };
            if !(w.re.is_finite() && w.im.is_finite()) {
                // collided with another iterate or hit a pole of g'/g: nudge off it
                let kick = Complex::from_polar(F::lit(1e-7), F::from_usize_lossy(i) + F::one());
                z[i] = zi + kick * zi.norm().max(F::lit(1e-3));
                worst = worst.max(F::one());
                continue;
            }
            z[i] = zi - w;
            let rel = w.norm() / z[i].norm().max(F::one());
            if rel < tol {
                done[i] = true;
            }
            worst = worst.max(rel);
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    Err(Error::OracleStagnated {
        iterations: MAX_SWEEPS,
        worst: worst.to_f64().unwrap_or(f64::NAN),
    })
}
