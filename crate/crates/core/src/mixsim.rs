//! Exact and Monte Carlo mixing of the shuffle, measured in total variation.
//!
//! Random bits come from ChaCha8 (`rand_chacha`). Trials are grouped in chunks
//! of [`CHUNK_TRIALS`]; chunk `c` uses the generator seeded with the master
//! seed and switched to stream `c`. Results are count sums over chunks, so
//! they do not depend on how chunks are scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{step_into, DistVector, ShuffleParams};
use crate::error::{Error, Result};

/// Name of the generator, recorded in simulation output.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), stream = chunk index";
pub const CHUNK_TRIALS: u64 = 4096;
/// Largest deck whose full permutation law is evolved exactly.
pub const EXACT_DECK_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub params: ShuffleParams,
    pub start: usize,
    pub trials: u64,
    pub steps: usize,
    pub rng_seed: u64,
}

impl SimConfig {
    pub fn new(params: ShuffleParams, start: usize, trials: u64, steps: usize, rng_seed: u64) -> Result<Self> {
        if start == 0 || start > params.n() {
            return Err(Error::InvalidParams(format!(
                "start position {start} outside [1, {}]",
                params.n()
            )));
        }
        if trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        Ok(Self {
            params,
            start,
            trials,
            steps,
            rng_seed,
        })
    }
}

/// Total-variation distance to uniform at `t = 0..=steps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TVSeries {
    pub values: Vec<f64>,
}

impl TVSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evolves a point mass at `start` and records its distance to uniform.
pub fn tv_exact(params: ShuffleParams, start: usize, steps: usize) -> Result<TVSeries> {
    let mut cur = DistVector::<f64>::point_mass(params.n(), start)?.as_slice().to_vec();
    let mut next = vec![0.0; params.n()];
    let u = 1.0 / params.n() as f64;
    let tv = |p: &[f64]| 0.5 * p.iter().map(|x| (x - u).abs()).sum::<f64>();
    let mut values = Vec::with_capacity(steps + 1);
    values.push(tv(&cur));
    for _ in 0..steps {
        step_into(params, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        values.push(tv(&cur));
    }
    Ok(TVSeries { values })
}

/// The exact law at each checkpoint, for comparison with [`simulate_card`].
pub fn exact_laws(params: ShuffleParams, start: usize, checkpoints: &[usize]) -> Result<Vec<Vec<f64>>> {
    check_checkpoints(checkpoints, usize::MAX)?;
    let mut cur = DistVector::<f64>::point_mass(params.n(), start)?.as_slice().to_vec();
    let mut next = vec![0.0; params.n()];
    let mut t = 0;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        while t < c {
            step_into(params, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            t += 1;
        }
        out.push(cur.clone());
    }
    Ok(out)
}

fn check_checkpoints(checkpoints: &[usize], steps: usize) -> Result<()> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("checkpoints must be strictly increasing".into()));
    }
    if let Some(&last) = checkpoints.last() {
        if last > steps {
            return Err(Error::Domain(format!("checkpoint {last} is beyond {steps} steps")));
        }
    }
    Ok(())
}

/// Streams fair coin flips out of 64-bit words.
struct CoinFlips {
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
}

impl CoinFlips {
    fn for_chunk(seed: u64, chunk: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        Self { rng, word: 0, left: 0 }
    }

    #[inline]
    fn flip(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        b
    }
}

fn chunks(trials: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let count = trials.div_ceil(CHUNK_TRIALS);
    (0..count).into_par_iter().map(move |c| {
        let size = CHUNK_TRIALS.min(trials - c * CHUNK_TRIALS);
        (c, size)
    })
}

/// Occupancy counts of the tracked card at each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CardCounts {
    pub checkpoints: Vec<usize>,
    /// `counts[c][i]` trials with the card at position `i + 1` at checkpoint `c`.
    pub counts: Vec<Vec<u64>>,
    pub trials: u64,
}

impl CardCounts {
    /// Empirical total-variation distance to uniform at each checkpoint.
    pub fn empirical_tv(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|row| {
                let u = 1.0 / row.len() as f64;
                let t = self.trials as f64;
                0.5 * row.iter().map(|&c| (c as f64 / t - u).abs()).sum::<f64>()
            })
            .collect()
    }
}

/// Runs `trials` independent trajectories of one card.
pub fn simulate_card(config: &SimConfig, checkpoints: &[usize]) -> Result<CardCounts> {
    check_checkpoints(checkpoints, config.steps)?;
    let n = config.params.n();
    let zero = || vec![vec![0u64; n]; checkpoints.len()];
    let counts = chunks(config.trials)
        .map(|(chunk, size)| {
            let mut flips = CoinFlips::for_chunk(config.rng_seed, chunk);
            let mut acc = zero();
            for _ in 0..size {
                let mut pos = config.start;
                let mut t = 0;
                for (c, &target) in checkpoints.iter().enumerate() {
                    while t < target {
                        pos = config.params.apply_move(pos, flips.flip());
                        t += 1;
                    }
                    acc[c][pos - 1] += 1;
                }
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
            a
        });
    Ok(CardCounts {
        checkpoints: checkpoints.to_vec(),
        counts,
        trials: config.trials,
    })
}

/// Largest per-cell deviation, in binomial standard deviations, between
/// simulated counts and the exact law.
pub fn max_cell_sigma(counts: &[u64], law: &[f64], trials: u64) -> f64 {
    let t = trials as f64;
    counts
        .iter()
        .zip(law)
        .map(|(&c, &p)| {
            let sd = (t * p * (1.0 - p)).sqrt();
            let diff = (c as f64 - t * p).abs();
            if sd > 0.0 {
                diff / sd
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Fit window `[start, end]` over `t`, split into blocks of `block` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FitWindow {
    pub start: usize,
    pub end: usize,
    pub block: usize,
}

pub const FIT_TV_MIN: f64 = 1e-9;
pub const FIT_TV_MAX: f64 = 0.2;

/// Empirical decay rate of a TV series.
///
/// Takes the largest `ln TV` in each block of the window (an upper envelope
/// that skips the troughs caused by complex eigenvalue phases) and returns
/// minus the least-squares slope through those points.
pub fn fit_relaxation(series: &TVSeries, window: FitWindow) -> Result<f64> {
    let FitWindow { start, end, block } = window;
    if block == 0 || start > end || end >= series.len() {
        return Err(Error::Domain(format!(
            "window [{start}, {end}] with block {block} does not fit a series of length {}",
            series.len()
        )));
    }
    let vals = &series.values[start..=end];
    if let Some((i, v)) = vals
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= FIT_TV_MIN && **v <= FIT_TV_MAX))
    {
        return Err(Error::Domain(format!(
            "TV({}) = {v:e} is outside [{FIT_TV_MIN:e}, {FIT_TV_MAX}]; fit unreliable",
            start + i
        )));
    }
    let points: Vec<(f64, f64)> = vals
        .chunks(block)
        .enumerate()
        .map(|(b, blk)| {
            let (i, v) = blk
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
            ((start + b * block + i) as f64, v.ln())
        })
        .collect();
    if points.len() < 2 {
        return Ok(0.0);
    }
    let m = points.len() as f64;
    let tbar = points.iter().map(|p| p.0).sum::<f64>() / m;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - tbar) * (p.1 - ybar)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - tbar) * (p.0 - tbar)).sum();
    Ok(-sxy / sxx)
}

/// First `t` with `TV ≤ hi` through the last `t` with `TV ≥ lo`.
pub fn window_between(series: &TVSeries, hi: f64, lo: f64, block: usize) -> Option<FitWindow> {
    let start = series.values.iter().position(|&v| v <= hi)?;
    let end = series.values.iter().rposition(|&v| v >= lo)?;
    (start < end).then_some(FitWindow { start, end, block })
}

/// Deck statistics at one checkpoint, averaged over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeckStat {
    pub t: usize,
    pub mean_fixed_points: f64,
    pub mean_cycles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeckSummary {
    pub stats: Vec<DeckStat>,
    /// Exact TV of the deck's permutation law, for `n ≤ EXACT_DECK_MAX_N`.
    pub exact_tv: Option<TVSeries>,
}

#[inline]
fn deck_move(deck: &mut [u16], bottom: bool, short: usize) {
    // positions are 0-based here: take the card at the cut to the top
    let cut = if bottom { deck.len() } else { short };
    deck[..cut].rotate_right(1);
}

fn cycle_stats(deck: &[u16], seen: &mut [bool]) -> (usize, usize) {
    seen.iter_mut().for_each(|s| *s = false);
    let mut fixed = 0;
    let mut cycles = 0;
    for i in 0..deck.len() {
        if deck[i] as usize == i {
            fixed += 1;
        }
        if !seen[i] {
            cycles += 1;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                j = deck[j] as usize;
            }
        }
    }
    (fixed, cycles)
}

/// Samples whole-deck trajectories from the identity and averages the
/// fixed-point and cycle counts at each checkpoint. Exploratory only.
pub fn simulate_deck(config: &SimConfig, checkpoints: &[usize]) -> Result<DeckSummary> {
    check_checkpoints(checkpoints, config.steps)?;
    let n = config.params.n();
    if n > u16::MAX as usize {
        return Err(Error::Domain(format!("deck size {n} is too large to sample")));
    }
    let short = config.params.short_cycle();
    let zero = || vec![(0u64, 0u64); checkpoints.len()];
    let sums = chunks(config.trials)
        .map(|(chunk, size)| {
            let mut flips = CoinFlips::for_chunk(config.rng_seed, chunk);
            let mut acc = zero();
            let mut deck: Vec<u16> = Vec::with_capacity(n);
            let mut seen = vec![false; n];
            for _ in 0..size {
                deck.clear();
                deck.extend(0..n as u16);
                let mut t = 0;
                for (c, &target) in checkpoints.iter().enumerate() {
                    while t < target {
                        deck_move(&mut deck, flips.flip(), short);
                        t += 1;
                    }
                    let (f, cy) = cycle_stats(&deck, &mut seen);
                    acc[c].0 += f as u64;
                    acc[c].1 += cy as u64;
                }
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0 += y.0;
                x.1 += y.1;
            }
            a
        });
    let tr = config.trials as f64;
    let stats = checkpoints
        .iter()
        .zip(sums)
        .map(|(&t, (f, c))| DeckStat {
            t,
            mean_fixed_points: f as f64 / tr,
            mean_cycles: c as f64 / tr,
        })
        .collect();
    let exact_tv = if n <= EXACT_DECK_MAX_N {
        Some(deck_tv_exact(config.params, config.steps)?)
    } else {
        None
    };
    Ok(DeckSummary { stats, exact_tv })
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lehmer-code rank of a permutation of `0..n`.
fn perm_rank(perm: &[u16]) -> usize {
    let n = perm.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

fn perm_unrank(mut rank: usize, n: usize) -> Vec<u16> {
    let mut digits = vec![0; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<u16> = (0..n as u16).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

/// Exact TV between the deck's law after `t` shuffles and uniform on `S_n`.
pub fn deck_tv_exact(params: ShuffleParams, steps: usize) -> Result<TVSeries> {
    let n = params.n();
    if n > EXACT_DECK_MAX_N {
        return Err(Error::Domain(format!(
            "exact deck law needs n <= {EXACT_DECK_MAX_N}, got {n}"
        )));
    }
    let states = factorial(n);
    let short = params.short_cycle();
    let succ: Vec<[usize; 2]> = (0..states)
        .map(|r| {
            let base = perm_unrank(r, n);
            [true, false].map(|bottom| {
                let mut d = base.clone();
                deck_move(&mut d, bottom, short);
                perm_rank(&d)
            })
        })
        .collect();
    let u = 1.0 / states as f64;
    let tv = |p: &[f64]| 0.5 * p.iter().map(|x| (x - u).abs()).sum::<f64>();
    let mut cur = vec![0.0; states];
    cur[0] = 1.0;
    let mut next = vec![0.0; states];
    let mut values = Vec::with_capacity(steps + 1);
    values.push(tv(&cur));
    for _ in 0..steps {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (r, &p) in cur.iter().enumerate() {
            if p != 0.0 {
                next[succ[r][0]] += 0.5 * p;
                next[succ[r][1]] += 0.5 * p;
            }
        }
        std::mem::swap(&mut cur, &mut next);
        values.push(tv(&cur));
    }
    Ok(TVSeries { values })
}
