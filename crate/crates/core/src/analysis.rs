//! Closed-form gap predictions, sweeps over `k`, and the bound checks built
//! on `γ(n,k)`.
//!
//! `⌊αn⌋` is read as the nearest integer to `αn`, rounding halves up.

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::ShuffleParams;
use crate::error::{Error, Result};
use crate::gamma::{dirichlet_upper_bound, gamma_min, norm_dist};
use crate::spectra::spectral_gap;
use crate::Real;

/// A reduced fraction `p/q ∈ [0, 1]` with its parity factor `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RationalPoint {
    p: u64,
    q: u64,
    parity: u64,
}

impl RationalPoint {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("q must be positive".into()));
        }
        if p > q {
            return Err(Error::Domain(format!("{p}/{q} exceeds 1")));
        }
        if p.gcd(&q) != 1 {
            return Err(Error::Domain(format!("{p}/{q} is not in lowest terms")));
        }
        let parity = if p % 2 == q % 2 { 1 } else { 2 };
        Ok(Self { p, q, parity })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `A = 1` when `p ≡ q (mod 2)`, else 2.
    pub fn parity_factor(&self) -> u64 {
        self.parity
    }

    /// Nearest integer to `np/q`, halves rounded up.
    pub fn nearest_k(&self, n: usize) -> usize {
        let num = 2 * self.p as u128 * n as u128 + self.q as u128;
        (num / (2 * self.q as u128)) as usize
    }
}

/// Nearest integer to `x`, halves rounded up.
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// `π² p q A² / (2n²)`, the gap at `k ≈ np/q` for `0 < p/q < 1`.
pub fn predict_rational<F: Real>(point: RationalPoint, n: usize) -> Result<F> {
    if point.p == 0 || point.p == point.q {
        return Err(Error::Domain(format!(
            "rational-point prediction needs 0 < p/q < 1, got {}/{}",
            point.p, point.q
        )));
    }
    let a = F::from_u64(point.parity).expect("small");
    let nf = F::from_usize_lossy(n);
    let pq = F::from_u64(point.p * point.q).expect("representable");
    Ok(F::pi_squared() * pq * a * a / (F::two() * nf * nf))
}

/// Offset of `k` from `np/q` in units of `n^{3/4}`, with the window check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellParams {
    pub point: RationalPoint,
    pub n: usize,
    pub k: usize,
    /// `c` in `k = (p/q) n + c n^{3/4}`.
    pub c: f64,
}

impl BellParams {
    /// Validates that `k` lies in the bell around `p/q`.
    ///
    /// For `p > 0` the bell is where the multiple `m = Aq` still beats every
    /// other multiplier, i.e. `A⁴q⁴c²(k/n + c²√n) ≤ 4(k/n)√n`; for small `c`
    /// this is `|c| ≤ (4k/n)^{1/4}/(Aq)`. For `p = 0` it is `k ≤ (n/2)^{2/3}`.
    pub fn new(point: RationalPoint, n: usize, k: usize) -> Result<Self> {
        let nf = n as f64;
        let c = (k as f64 - point.p as f64 * nf / point.q as f64) / nf.powf(0.75);
        let bell = Self { point, n, k, c };
        if point.p == 0 {
            let limit = (nf / 2.0).powf(2.0 / 3.0);
            if k as f64 > limit {
                return Err(Error::Domain(format!(
                    "k = {k} exceeds the p = 0 window k <= (n/2)^(2/3) = {limit:.4}"
                )));
            }
        } else if !bell.in_window() {
            let aq = (point.parity * point.q) as f64;
            return Err(Error::Domain(format!(
                "k = {k} (c = {c:.5}) is outside the bell A^4 q^4 c^2 (k/n + c^2 sqrt(n)) <= 4 (k/n) sqrt(n); \
                 asymptotic bound |c| <= (4k/n)^(1/4)/(Aq) = {:.5}",
                (4.0 * k as f64 / nf).powf(0.25) / aq
            )));
        }
        Ok(bell)
    }

    fn in_window(&self) -> bool {
        let nf = self.n as f64;
        let kn = self.k as f64 / nf;
        let aq = (self.point.parity * self.point.q) as f64;
        let c2 = self.c * self.c;
        aq.powi(4) * c2 * (kn + c2 * nf.sqrt()) <= 4.0 * kn * nf.sqrt()
    }
}

/// Every `k ∈ [1, n−1]` inside the bell around `point`.
pub fn bell_window(point: RationalPoint, n: usize) -> Vec<usize> {
    (1..n).filter(|&k| BellParams::new(point, n, k).is_ok()).collect()
}

/// Gap predicted inside the bell around `p/q`:
/// `π²pqA²/(2n²)·(1 + (q/p)(k − np/q)²/n)`, or `2π²(k + k²)/n³` when `p = 0`.
pub fn predict_bell<F: Real>(bell: &BellParams) -> F {
    let nf = F::from_usize_lossy(bell.n);
    let kf = F::from_usize_lossy(bell.k);
    if bell.point.p == 0 {
        return F::two() * F::pi_squared() * (kf + kf * kf) / (nf * nf * nf);
    }
    let p = F::from_u64(bell.point.p).expect("small");
    let q = F::from_u64(bell.point.q).expect("small");
    let a = F::from_u64(bell.point.parity).expect("small");
    let d = kf - p * nf / q;
    F::pi_squared() * p * q * a * a / (F::two() * nf * nf) * (F::one() + q / p * d * d / nf)
}

/// Convenience: validate the bell and predict.
pub fn predict_at<F: Real>(point: RationalPoint, n: usize, k: usize) -> Result<F> {
    Ok(predict_bell(&BellParams::new(point, n, k)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaCheck {
    pub delta: f64,
    /// `(π²/2) δ n^{−3/2}`
    pub threshold: f64,
    pub count: usize,
    /// `4 δ^{2/3} n`
    pub allowed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    /// `k` with `γ(n,k) > 2π²√k/n²`.
    pub upper_violations: Vec<usize>,
    /// `k` with `γ(n,k) < 4π²/n³`.
    pub lower_violations: Vec<usize>,
    /// Whether `k = 1` attains `4π²/n³` exactly (`k m² + r² = 8`).
    pub lower_attained_at_k1: bool,
    pub deltas: Vec<DeltaCheck>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.upper_violations.is_empty()
            && self.lower_violations.is_empty()
            && self.deltas.iter().all(|d| d.pass)
    }
}

/// Sweeps every `k` and checks the upper bound `2π²√k/n²`, the lower bound
/// `4π²/n³`, and for each `δ` that fewer than `4δ^{2/3}n` values of `k`
/// have `γ(n,k) < (π²/2)δn^{−3/2}`.
pub fn check_gamma_bounds(n: usize, deltas: &[f64]) -> Result<BoundsReport> {
    if n < 11 {
        return Err(Error::Domain(format!("bound sweep needs n >= 11, got {n}")));
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::Domain(format!("delta must be positive, got {d}")));
    }
    let gammas: Vec<(usize, i128, f64, f64)> = (1..n)
        .into_par_iter()
        .map(|k| {
            let pr = ShuffleParams::new(n, k).expect("1 <= k < n");
            let g = gamma_min::<f64>(pr);
            (k, g.numerator, g.value, dirichlet_upper_bound::<f64>(pr))
        })
        .collect();

    let mut upper_violations = Vec::new();
    let mut lower_violations = Vec::new();
    for &(k, num, value, upper) in &gammas {
        if value > upper {
            upper_violations.push(k);
        }
        // 4π²/n³ ⇔ k m² + r² ≥ 8, checked exactly
        if num < 8 {
            lower_violations.push(k);
        }
    }
    let lower_attained_at_k1 = gammas[0].1 == 8;

    let nf = n as f64;
    let pi2 = std::f64::consts::PI.powi(2);
    let deltas = deltas
        .iter()
        .map(|&delta| {
            let threshold = pi2 / 2.0 * delta * nf.powf(-1.5);
            let count = gammas.iter().filter(|g| g.2 < threshold).count();
            let allowed = 4.0 * delta.powf(2.0 / 3.0) * nf;
            DeltaCheck {
                delta,
                threshold,
                count,
                allowed,
                pass: count as f64 <= allowed,
            }
        })
        .collect();
    Ok(BoundsReport {
        n,
        upper_violations,
        lower_violations,
        lower_attained_at_k1,
        deltas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadApproxRow {
    pub q: u64,
    pub n: u64,
    pub k: u64,
    pub m_star: i64,
    pub gamma: f64,
    /// `γ(n,k) n^{3/2}`
    pub product: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadApproxReport {
    pub alpha: f64,
    /// `2π²√α/√5`
    pub bound: f64,
    pub slack: f64,
    pub rows: Vec<BadApproxRow>,
    /// Requested `q` that failed `‖q(1−α)/2‖ < 1/(√5 q)` or `q² ≥ 1/α`.
    pub skipped: Vec<u64>,
}

impl BadApproxReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

pub const BAD_APPROX_SLACK: f64 = 1.15;

/// For each qualifying `q`, sets `n = ⌈5q⁴α/4⌉`, `k = round(αn)` and compares
/// `γ(n,k) n^{3/2}` with `2π²√α/√5` (allowing a factor [`BAD_APPROX_SLACK`]).
pub fn bad_approx_sequence(alpha: f64, q_list: &[u64]) -> Result<BadApproxReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let bound = 2.0 * std::f64::consts::PI.powi(2) * alpha.sqrt() / 5f64.sqrt();
    let x = (1.0 - alpha) / 2.0;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &q in q_list {
        let qf = q as f64;
        let good = q >= 1 && qf * qf >= 1.0 / alpha && norm_dist(qf * x) < 1.0 / (5f64.sqrt() * qf);
        if !good {
            skipped.push(q);
            continue;
        }
        let n = (5.0 * qf.powi(4) * alpha / 4.0).ceil() as u64;
        let k = round_half_up(alpha * n as f64).clamp(1, n as i64 - 1) as u64;
        let pr = ShuffleParams::new(n as usize, k as usize)?;
        let g = gamma_min::<f64>(pr);
        let product = g.value * (n as f64).powf(1.5);
        rows.push(BadApproxRow {
            q,
            n,
            k,
            m_star: g.m_star,
            gamma: g.value,
            product,
            bound,
            pass: product < bound * BAD_APPROX_SLACK,
        });
    }
    Ok(BadApproxReport {
        alpha,
        bound,
        slack: BAD_APPROX_SLACK,
        rows,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub k: usize,
    pub relaxation: f64,
    /// Lower envelope on the relaxation time, `√3 n² / (2π² √k)`.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub n: usize,
    pub rows: Vec<EnvelopeRow>,
    /// `max_k γ(n,k) n² / √k`
    pub max_scaled: f64,
    pub argmax_k: usize,
    /// `2π²/√3`
    pub conjectured: f64,
}

/// How close `γ(n,k)` comes to `(2π²/√3) √k / n²`. Reported, never asserted.
pub fn envelope_report(n: usize) -> Result<EnvelopeReport> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("n = {n} must be at least 2")));
    }
    let nf = n as f64;
    let conjectured = 2.0 * std::f64::consts::PI.powi(2) / 3f64.sqrt();
    let rows: Vec<(EnvelopeRow, f64)> = (1..n)
        .into_par_iter()
        .map(|k| {
            let g = gamma_min::<f64>(ShuffleParams::new(n, k).expect("1 <= k < n"));
            let sk = (k as f64).sqrt();
            let row = EnvelopeRow {
                k,
                relaxation: 1.0 / g.value,
                envelope: nf * nf / (conjectured * sk),
            };
            (row, g.value * nf * nf / sk)
        })
        .collect();
    let (argmax_k, max_scaled) = rows
        .iter()
        .map(|(r, s)| (r.k, *s))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(EnvelopeReport {
        n,
        rows: rows.into_iter().map(|(r, _)| r).collect(),
        max_scaled,
        argmax_k,
        conjectured,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRecord {
    pub n: usize,
    pub k: usize,
    pub m_star: i64,
    pub gamma: f64,
    pub relaxation: f64,
    pub gap_numeric: Option<f64>,
    pub ratio: Option<f64>,
}

/// `γ(n,k)` and relaxation for every `k`, plus the numeric gap for
/// `k ≡ 0 (mod stride)` when requested. Output is ordered by `k`.
pub fn scan_k(n: usize, with_numeric: bool, stride: usize) -> Result<Vec<ScanRecord>> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("n = {n} must be at least 2")));
    }
    if stride == 0 {
        return Err(Error::Domain("stride must be positive".into()));
    }
    (1..n)
        .into_par_iter()
        .map(|k| {
            let pr = ShuffleParams::new(n, k)?;
            let g = gamma_min::<f64>(pr);
            let (gap_numeric, ratio) = if with_numeric && k % stride == 0 {
                let gap = spectral_gap::<f64>(pr)?.gap;
                (Some(gap), Some(gap / g.value))
            } else {
                (None, None)
            };
            Ok(ScanRecord {
                n,
                k,
                m_star: g.m_star,
                gamma: g.value,
                relaxation: 1.0 / g.value,
                gap_numeric,
                ratio,
            })
        })
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let len = v.len();
    if len == 0 {
        return f64::NAN;
    }
    if len % 2 == 1 {
        v[len / 2]
    } else {
        0.5 * (v[len / 2 - 1] + v[len / 2])
    }
}

/// Values of `k` where the relaxation time is at least that of both neighbours.
pub fn local_maxima(records: &[ScanRecord]) -> Vec<usize> {
    let r: Vec<f64> = records.iter().map(|x| x.relaxation).collect();
    (0..r.len())
        .filter(|&i| {
            let left = i == 0 || r[i] >= r[i - 1];
            let right = i + 1 == r.len() || r[i] >= r[i + 1];
            left && right
        })
        .map(|i| records[i].k)
        .collect()
}

/// Fractions `p/q ∈ (0, 1)` in lowest terms with `q ≤ q_max`.
pub fn simple_fractions(q_max: u64) -> Vec<RationalPoint> {
    let mut out = Vec::new();
    for q in 2..=q_max {
        for p in 1..q {
            if let Ok(rp) = RationalPoint::new(p, q) {
                out.push(rp);
            }
        }
    }
    out
}
