use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// One convergent `p/q` of a continued fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub p: u64,
    pub q: u64,
}

/// Continued-fraction expansion of a rational in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfApprox {
    pub x: Ratio<u64>,
    /// `[a0; a1, a2, ...]`, with `a0 = 0`.
    pub partial_quotients: Vec<u64>,
    pub convergents: Vec<Convergent>,
}

impl CfApprox {
    pub fn denominators(&self) -> impl Iterator<Item = u64> + '_ {
        self.convergents.iter().map(|c| c.q)
    }
}

/// Expands `num/den` by the Euclidean algorithm.
pub fn cf_expand(num: u64, den: u64) -> Result<CfApprox> {
    if den == 0 {
        return Err(Error::Domain("zero denominator".into()));
    }
    if num >= den {
        return Err(Error::Domain(format!("{num}/{den} is not in [0, 1)")));
    }
    let x = Ratio::new(num, den);
    let (mut a, mut b) = (*x.numer(), *x.denom());

    let mut partial_quotients = Vec::new();
    let mut convergents = Vec::new();
    // (p_{j-2}, q_{j-2}), (p_{j-1}, q_{j-1})
    let (mut p2, mut q2, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    while b != 0 {
        let (quot, rem) = a.div_rem(&b);
        partial_quotients.push(quot);
        let p = quot * p1 + p2;
        let q = quot * q1 + q2;
        convergents.push(Convergent { p, q });
        (p2, q2, p1, q1) = (p1, q1, p, q);
        (a, b) = (b, rem);
    }
    Ok(CfApprox {
        x,
        partial_quotients,
        convergents,
    })
}
